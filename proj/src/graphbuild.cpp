#include "qtrack/graphbuild.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "qtrack/errors.hpp"

namespace qtrack::graphbuild {

namespace {

void write_full(std::ostream& os, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  os.write(buf, end - buf);
}

}  // namespace

double wrap_angle(double phi) {
  double w = std::remainder(phi, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  return w;
}

trackdata::EventRecord select_hits(const trackdata::EventRecord& event,
                                   const SelectionCuts& cuts) {
  // Best (lowest |z|) hit per (particle, layer); module overlaps produce
  // duplicate hits on one layer and the truth labels need a single survivor.
  std::map<std::pair<long long, int>, std::size_t> best;
  std::vector<bool> keep(event.hits.size(), false);
  for (std::size_t i = 0; i < event.hits.size(); ++i) {
    const trackdata::Hit& hit = event.hits[i];
    if (!cuts.barrel_volumes.count(hit.volume_id)) continue;
    if (hit.particle_id == 0) continue;
    if (hit.pt < cuts.pt_min) continue;
    const int layer = trackdata::layer_index(hit.volume_id, hit.layer_id);
    if (layer < 0) continue;
    const trackdata::Coords c = trackdata::derived_coords(hit);
    if (c.eta < cuts.eta_min || c.eta > cuts.eta_max) continue;
    const auto key = std::make_pair(hit.particle_id, layer);
    auto it = best.find(key);
    if (it == best.end()) {
      best[key] = i;
      keep[i] = true;
    } else if (std::abs(hit.z) < std::abs(event.hits[it->second].z)) {
      keep[it->second] = false;
      it->second = i;
      keep[i] = true;
    }
  }
  trackdata::EventRecord out;
  out.event_id = event.event_id;
  for (std::size_t i = 0; i < event.hits.size(); ++i) {
    if (keep[i]) out.hits.push_back(event.hits[i]);
  }
  return out;
}

std::vector<Doublet> build_doublets(const trackdata::EventRecord& event,
                                    const SelectionCuts& cuts) {
  std::vector<std::vector<int>> by_layer(10);
  std::vector<trackdata::Coords> coords(event.hits.size());
  for (std::size_t i = 0; i < event.hits.size(); ++i) {
    const trackdata::Hit& h = event.hits[i];
    const int layer = trackdata::layer_index(h.volume_id, h.layer_id);
    if (layer < 0) continue;
    by_layer[static_cast<std::size_t>(layer)].push_back(static_cast<int>(i));
    coords[i] = trackdata::derived_coords(h);
  }
  std::vector<Doublet> doublets;
  for (std::size_t layer = 0; layer + 1 < by_layer.size(); ++layer) {
    for (int i : by_layer[layer]) {
      for (int j : by_layer[layer + 1]) {
        const auto& ci = coords[static_cast<std::size_t>(i)];
        const auto& cj = coords[static_cast<std::size_t>(j)];
        const double dr = cj.r - ci.r;
        if (dr <= 0.0) {
          throw GeometryError("non-increasing radius between adjacent layers");
        }
        const double dphi = wrap_angle(cj.phi - ci.phi);
        const double z0 =
            event.hits[static_cast<std::size_t>(i)].z -
            ci.r * (event.hits[static_cast<std::size_t>(j)].z -
                    event.hits[static_cast<std::size_t>(i)].z) / dr;
        if (std::abs(dphi / dr) >= cuts.dphi_slope_max) continue;
        if (std::abs(z0) >= cuts.z0_max) continue;
        doublets.push_back({i, j, dphi, dr, z0});
      }
    }
  }
  return doublets;
}

std::vector<int> label_edges(const std::vector<Doublet>& edges,
                             const trackdata::EventRecord& event) {
  std::vector<int> labels(edges.size(), 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& a = event.hits[static_cast<std::size_t>(edges[e].inner)];
    const auto& b = event.hits[static_cast<std::size_t>(edges[e].outer)];
    labels[e] = (a.particle_id != 0 && a.particle_id == b.particle_id) ? 1 : 0;
  }
  return labels;
}

std::vector<SubGraph> slice_event(const trackdata::EventRecord& event,
                                  const SliceSpec& spec,
                                  const SelectionCuts& cuts) {
  if (spec.n_phi < 1 || spec.n_z < 1) {
    throw ConstructionError("slice spec bins must be >= 1");
  }
  const GraphMeta base;
  const double phi_width = 2.0 * M_PI / spec.n_phi;
  const double z_width = (base.z_max - base.z_min) / spec.n_z;

  std::vector<std::vector<std::size_t>> members(
      static_cast<std::size_t>(spec.n_phi * spec.n_z));
  for (std::size_t i = 0; i < event.hits.size(); ++i) {
    const trackdata::Coords c = trackdata::derived_coords(event.hits[i]);
    int pi = static_cast<int>(std::floor((c.phi + M_PI) / phi_width));
    pi = std::clamp(pi, 0, spec.n_phi - 1);
    int zi = static_cast<int>(
        std::floor((event.hits[i].z - base.z_min) / z_width));
    zi = std::clamp(zi, 0, spec.n_z - 1);
    members[static_cast<std::size_t>(pi * spec.n_z + zi)].push_back(i);
  }

  std::vector<SubGraph> graphs;
  graphs.reserve(members.size());
  for (int pi = 0; pi < spec.n_phi; ++pi) {
    for (int zi = 0; zi < spec.n_z; ++zi) {
      trackdata::EventRecord slice;
      slice.event_id = event.event_id;
      for (std::size_t i : members[static_cast<std::size_t>(pi * spec.n_z + zi)]) {
        slice.hits.push_back(event.hits[i]);
      }
      SubGraph g;
      g.meta.event_id = event.event_id;
      g.meta.phi_index = pi;
      g.meta.z_index = zi;
      g.meta.phi_min = -M_PI + pi * phi_width;
      g.meta.phi_max = g.meta.phi_min + phi_width;
      g.node_features = Matrix(slice.hits.size(), 3);
      for (std::size_t i = 0; i < slice.hits.size(); ++i) {
        const trackdata::Coords c = trackdata::derived_coords(slice.hits[i]);
        g.node_features(i, 0) = c.r;
        g.node_features(i, 1) = c.phi;
        g.node_features(i, 2) = slice.hits[i].z;
      }
      const std::vector<Doublet> doublets = build_doublets(slice, cuts);
      const std::vector<int> labels = label_edges(doublets, slice);
      for (const Doublet& d : doublets) g.edges.emplace_back(d.inner, d.outer);
      g.labels = labels;
      graphs.push_back(std::move(g));
    }
  }
  return graphs;
}

SubGraph scale_features(const SubGraph& graph) {
  if (graph.scaled) return graph;
  SubGraph out = graph;
  const GraphMeta& m = graph.meta;
  const double spans[3][2] = {{m.r_min, m.r_max},
                              {m.phi_min, m.phi_max},
                              {m.z_min, m.z_max}};
  for (std::size_t i = 0; i < out.node_features.rows; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = out.node_features(i, c);
      const double lo = spans[c][0], hi = spans[c][1];
      if (v < lo || v > hi) {
        throw RangeError("scale_features: value " + std::to_string(v) +
                         " outside [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "] in column " + std::to_string(c));
      }
      out.node_features(i, c) = (v - lo) / (hi - lo);
    }
  }
  out.scaled = true;
  return out;
}

void write_graph(const SubGraph& graph, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "qtrack-graph 1\n";
  os << "event " << graph.meta.event_id << "\n";
  os << "slice " << graph.meta.phi_index << " " << graph.meta.z_index << "\n";
  os << "bounds";
  for (double b : {graph.meta.r_min, graph.meta.r_max, graph.meta.phi_min,
                   graph.meta.phi_max, graph.meta.z_min, graph.meta.z_max}) {
    os << " ";
    write_full(os, b);
  }
  os << "\n";
  os << "scaled " << (graph.scaled ? 1 : 0) << "\n";
  os << "nodes " << graph.node_features.rows << "\n";
  os << "edges " << graph.edges.size() << "\n";
  for (std::size_t i = 0; i < graph.node_features.rows; ++i) {
    os << "n";
    for (std::size_t c = 0; c < 3; ++c) {
      os << " ";
      write_full(os, graph.node_features(i, c));
    }
    os << "\n";
  }
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    os << "e " << graph.edges[e].first << " " << graph.edges[e].second << " "
       << graph.labels[e] << "\n";
  }
}

namespace {

struct LineReader {
  std::ifstream in;
  std::string path;
  int line_no = 0;

  explicit LineReader(const std::filesystem::path& p) : in(p), path(p.string()) {
    if (!in) throw IoError("cannot open " + path);
  }

  std::istringstream next(const std::string& expect_tag) {
    std::string line;
    if (!std::getline(in, line)) {
      throw ParseError(path + ":" + std::to_string(line_no + 1) +
                       ": unexpected end of file (wanted '" + expect_tag + "')");
    }
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != expect_tag) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected '" +
                       expect_tag + "', got '" + tag + "'");
    }
    return ss;
  }
};

}  // namespace

SubGraph read_graph(const std::filesystem::path& path) {
  LineReader r(path);
  {
    auto ss = r.next("qtrack-graph");
    int version = 0;
    ss >> version;
    if (version != 1) {
      throw ParseError(r.path + ":1: unsupported graph version");
    }
  }
  SubGraph g;
  r.next("event") >> g.meta.event_id;
  {
    auto ss = r.next("slice");
    ss >> g.meta.phi_index >> g.meta.z_index;
  }
  {
    auto ss = r.next("bounds");
    ss >> g.meta.r_min >> g.meta.r_max >> g.meta.phi_min >> g.meta.phi_max >>
        g.meta.z_min >> g.meta.z_max;
    if (!ss) throw ParseError(r.path + ": malformed bounds line");
  }
  {
    int scaled = 0;
    r.next("scaled") >> scaled;
    g.scaled = scaled != 0;
  }
  std::size_t n_nodes = 0, n_edges = 0;
  r.next("nodes") >> n_nodes;
  r.next("edges") >> n_edges;
  g.node_features = Matrix(n_nodes, 3);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    auto ss = r.next("n");
    ss >> g.node_features(i, 0) >> g.node_features(i, 1) >> g.node_features(i, 2);
    if (!ss) {
      throw ParseError(r.path + ":" + std::to_string(r.line_no) +
                       ": malformed node line");
    }
  }
  g.edges.resize(n_edges);
  g.labels.resize(n_edges);
  for (std::size_t e = 0; e < n_edges; ++e) {
    auto ss = r.next("e");
    ss >> g.edges[e].first >> g.edges[e].second >> g.labels[e];
    if (!ss) {
      throw ParseError(r.path + ":" + std::to_string(r.line_no) +
                       ": malformed edge line");
    }
    if (g.edges[e].first < 0 ||
        g.edges[e].first >= static_cast<int>(n_nodes) ||
        g.edges[e].second < 0 ||
        g.edges[e].second >= static_cast<int>(n_nodes)) {
      throw ParseError(r.path + ":" + std::to_string(r.line_no) +
                       ": edge node index out of range");
    }
  }
  return g;
}

}  // namespace qtrack::graphbuild
