#include "qtrack/trackdata.hpp"

#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>
#include <set>
#include <unordered_map>

#include "qtrack/errors.hpp"
#include "qtrack/rng.hpp"

namespace qtrack::trackdata {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name, const std::string& file) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw SchemaError(file + ": missing column '" + name + "'");
  }
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty file, no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    table.rows.push_back(split_csv_line(line));
  }
  return table;
}

double to_double(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(ctx + ": bad numeric field '" + s + "'");
  }
}

long long to_ll(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(ctx + ": bad integer field '" + s + "'");
  }
}

void write_full(std::ostream& os, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  os.write(buf, end - buf);
}

}  // namespace

Coords derived_coords(const Hit& hit) {
  const double r = std::hypot(hit.x, hit.y);
  const double rho = std::hypot(r, hit.z);
  if (rho == 0.0) throw SingularityError("derived_coords: hit at origin");
  if (r == 0.0) throw SingularityError("derived_coords: hit on the beam axis");
  Coords c;
  c.r = r;
  c.phi = std::atan2(hit.y, hit.x);
  const double theta = std::atan2(r, hit.z);
  c.eta = -std::log(std::tan(theta / 2.0));
  return c;
}

const std::vector<double>& default_layer_radii() {
  static const std::vector<double> radii = {32.0,  72.0,  116.0, 172.0, 260.0,
                                            360.0, 500.0, 660.0, 820.0, 1020.0};
  return radii;
}

std::pair<int, int> layer_label(int layer_index) {
  static const std::pair<int, int> labels[] = {
      {8, 2},  {8, 4},  {8, 6},  {8, 8},  {13, 2},
      {13, 4}, {13, 6}, {13, 8}, {17, 2}, {17, 4}};
  if (layer_index < 0 || layer_index >= 10) {
    throw IndexError("layer_label: index out of range");
  }
  return labels[layer_index];
}

int layer_index(int volume_id, int layer_id) {
  for (int i = 0; i < 10; ++i) {
    const auto [v, l] = layer_label(i);
    if (v == volume_id && l == layer_id) return i;
  }
  return -1;
}

EventRecord generate_toy_event(const ToyConfig& config, long long event_id) {
  for (std::size_t i = 1; i < config.layer_radii.size(); ++i) {
    if (config.layer_radii[i] <= config.layer_radii[i - 1]) {
      throw ConstructionError("layer_radii must be strictly increasing");
    }
  }
  if (config.pt_min <= 0.0 || config.pt_max < config.pt_min) {
    throw ConstructionError("pt_range must be positive");
  }
  EventRecord event;
  event.event_id = event_id;
  Rng rng(config.seed + static_cast<std::uint64_t>(event_id));
  long long next_hit_id = 1;
  for (int p = 0; p < config.n_particles; ++p) {
    const long long pid = p + 1;
    const double charge = uniform01(rng) < 0.5 ? 1.0 : -1.0;
    const double phi0 = uniform(rng, -M_PI, M_PI);
    const double eta = uniform(rng, -config.eta_max, config.eta_max);
    const double pt = uniform(rng, config.pt_min, config.pt_max);
    const double z0 = uniform(rng, -config.z0_spread, config.z0_spread);
    // Solenoid bending radius in mm: R = pt / (0.3 B) in meters.
    const double helix_radius = 1000.0 * pt / (0.3 * config.field_tesla);
    const double sinh_eta = std::sinh(eta);
    for (std::size_t li = 0; li < config.layer_radii.size(); ++li) {
      const double r = config.layer_radii[li];
      if (r >= 2.0 * helix_radius) break;  // helix never reaches this layer
      const double alpha = 2.0 * std::asin(r / (2.0 * helix_radius));
      const double phi_hit = phi0 + charge * alpha / 2.0;
      const double z = z0 + helix_radius * alpha * sinh_eta;
      if (std::abs(z) > kBarrelHalfLengthMm) break;
      Hit hit;
      hit.hit_id = next_hit_id++;
      hit.x = r * std::cos(phi_hit);
      hit.y = r * std::sin(phi_hit);
      hit.z = z;
      const auto [vol, lay] = layer_label(static_cast<int>(li));
      hit.volume_id = vol;
      hit.layer_id = lay;
      hit.module_id = 1;
      hit.particle_id = pid;
      hit.pt = pt;
      event.hits.push_back(hit);
    }
  }
  return event;
}

EventRecord load_trackml_event(const std::filesystem::path& hits_path,
                               const std::filesystem::path& truth_path,
                               const std::filesystem::path& particles_path,
                               long long event_id) {
  const CsvTable hits = read_csv(hits_path);
  const std::string hname = hits_path.filename().string();
  const int c_hit = hits.column("hit_id", hname);
  const int c_x = hits.column("x", hname);
  const int c_y = hits.column("y", hname);
  const int c_z = hits.column("z", hname);
  const int c_vol = hits.column("volume_id", hname);
  const int c_lay = hits.column("layer_id", hname);
  const int c_mod = hits.column("module_id", hname);

  EventRecord event;
  event.event_id = event_id;
  std::unordered_map<long long, std::size_t> by_id;
  for (const auto& row : hits.rows) {
    Hit hit;
    hit.hit_id = to_ll(row[static_cast<std::size_t>(c_hit)], hname);
    hit.x = to_double(row[static_cast<std::size_t>(c_x)], hname);
    hit.y = to_double(row[static_cast<std::size_t>(c_y)], hname);
    hit.z = to_double(row[static_cast<std::size_t>(c_z)], hname);
    hit.volume_id = static_cast<int>(to_ll(row[static_cast<std::size_t>(c_vol)], hname));
    hit.layer_id = static_cast<int>(to_ll(row[static_cast<std::size_t>(c_lay)], hname));
    hit.module_id = static_cast<int>(to_ll(row[static_cast<std::size_t>(c_mod)], hname));
    if (by_id.count(hit.hit_id)) {
      throw SchemaError(hname + ": duplicate hit_id " + std::to_string(hit.hit_id));
    }
    by_id[hit.hit_id] = event.hits.size();
    event.hits.push_back(hit);
  }

  const CsvTable truth = read_csv(truth_path);
  const std::string tname = truth_path.filename().string();
  const int t_hit = truth.column("hit_id", tname);
  const int t_pid = truth.column("particle_id", tname);
  const int t_tpx = truth.column("tpx", tname);
  const int t_tpy = truth.column("tpy", tname);
  truth.column("tx", tname);
  truth.column("ty", tname);
  truth.column("tz", tname);
  truth.column("tpz", tname);
  truth.column("weight", tname);
  std::set<long long> joined;
  for (const auto& row : truth.rows) {
    const long long hit_id = to_ll(row[static_cast<std::size_t>(t_hit)], tname);
    auto it = by_id.find(hit_id);
    if (it == by_id.end()) {
      throw JoinError(tname + ": truth row references unknown hit_id " +
                      std::to_string(hit_id));
    }
    joined.insert(hit_id);
    Hit& hit = event.hits[it->second];
    hit.particle_id = to_ll(row[static_cast<std::size_t>(t_pid)], tname);
    const double tpx = to_double(row[static_cast<std::size_t>(t_tpx)], tname);
    const double tpy = to_double(row[static_cast<std::size_t>(t_tpy)], tname);
    hit.pt = hit.particle_id == 0 ? 0.0 : std::hypot(tpx, tpy);
  }
  if (joined.size() != event.hits.size()) {
    for (const Hit& hit : event.hits) {
      if (!joined.contains(hit.hit_id)) {
        throw JoinError(tname + ": no truth row for hit_id " +
                        std::to_string(hit.hit_id));
      }
    }
  }

  // Particles table is only schema-checked; pt comes from the truth momenta.
  const CsvTable particles = read_csv(particles_path);
  const std::string pname = particles_path.filename().string();
  for (const char* col : {"particle_id", "vx", "vy", "vz", "px", "py", "pz", "q", "nhits"}) {
    particles.column(col, pname);
  }
  return event;
}

std::string event_prefix(long long event_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "event%09lld", event_id);
  return buf;
}

void write_trackml_event(const EventRecord& event,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string prefix = event_prefix(event.event_id);

  std::ofstream hits(dir / (prefix + "-hits.csv"));
  if (!hits) throw IoError("cannot write hits CSV in " + dir.string());
  hits << "hit_id,x,y,z,volume_id,layer_id,module_id\n";
  for (const Hit& h : event.hits) {
    hits << h.hit_id << ',';
    write_full(hits, h.x); hits << ',';
    write_full(hits, h.y); hits << ',';
    write_full(hits, h.z); hits << ',';
    hits << h.volume_id << ',' << h.layer_id << ',' << h.module_id << '\n';
  }

  std::ofstream truth(dir / (prefix + "-truth.csv"));
  if (!truth) throw IoError("cannot write truth CSV in " + dir.string());
  truth << "hit_id,particle_id,tx,ty,tz,tpx,tpy,tpz,weight\n";
  for (const Hit& h : event.hits) {
    // Truth momentum direction is not tracked per hit in memory; the
    // transverse magnitude is what the loader consumes (pt = hypot(tpx,tpy)),
    // so write it along x with zero y component.
    truth << h.hit_id << ',' << h.particle_id << ',';
    write_full(truth, h.x); truth << ',';
    write_full(truth, h.y); truth << ',';
    write_full(truth, h.z); truth << ',';
    write_full(truth, h.pt); truth << ",0,0,0\n";
  }

  std::ofstream particles(dir / (prefix + "-particles.csv"));
  if (!particles) throw IoError("cannot write particles CSV in " + dir.string());
  particles << "particle_id,vx,vy,vz,px,py,pz,q,nhits\n";
  std::vector<std::pair<long long, int>> counts;
  for (const Hit& h : event.hits) {
    if (h.particle_id == 0) continue;
    bool found = false;
    for (auto& [pid, n] : counts) {
      if (pid == h.particle_id) { ++n; found = true; break; }
    }
    if (!found) counts.emplace_back(h.particle_id, 1);
  }
  for (const auto& [pid, n] : counts) {
    double pt = 0.0;
    for (const Hit& h : event.hits) {
      if (h.particle_id == pid) { pt = h.pt; break; }
    }
    particles << pid << ",0,0,0,";
    write_full(particles, pt);
    particles << ",0,0,1," << n << '\n';
  }
}

}  // namespace qtrack::trackdata
