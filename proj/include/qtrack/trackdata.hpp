#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qtrack::trackdata {

// One detector measurement. particle_id 0 means noise; pt is the truth
// particle's transverse momentum attached during the hits/truth join.
struct Hit {
  long long hit_id = 0;
  double x = 0.0, y = 0.0, z = 0.0;  // mm
  int volume_id = 0, layer_id = 0, module_id = 0;
  long long particle_id = 0;
  double pt = 0.0;  // GeV
};

struct EventRecord {
  long long event_id = 0;
  std::vector<Hit> hits;
};

struct Coords {
  double r = 0.0;    // mm
  double phi = 0.0;  // (-pi, pi]
  double eta = 0.0;
};

Coords derived_coords(const Hit& hit);

// Barrel layer table: radii in mm with their TrackML (volume, layer) labels.
// These are configurable defaults consistent with a barrel-only geometry,
// not measured values.
const std::vector<double>& default_layer_radii();
std::pair<int, int> layer_label(int layer_index);
// -1 if (volume, layer) is not a known barrel layer.
int layer_index(int volume_id, int layer_id);

struct ToyConfig {
  int n_particles = 10;
  double pt_min = 1.5, pt_max = 5.0;  // GeV
  std::vector<double> layer_radii = default_layer_radii();
  double field_tesla = 2.0;
  double z0_spread = 30.0;  // mm
  double eta_max = 1.2;     // barrel acceptance, +/- range
  std::uint64_t seed = 1;
};

// Half-length of the toy barrel: hits the helix would place beyond |z| of
// this are outside the detector and are not produced.
inline constexpr double kBarrelHalfLengthMm = 1090.0;

// Each particle is a helix from (0, 0, z0); one hit per layer radius the
// helix reaches inside the barrel. Deterministic for a fixed seed.
EventRecord generate_toy_event(const ToyConfig& config, long long event_id);

// TrackML public schema loader. Joins hits with truth to attach particle_id
// and pt = hypot(tpx, tpy); the particles file is validated for schema.
EventRecord load_trackml_event(const std::filesystem::path& hits_path,
                               const std::filesystem::path& truth_path,
                               const std::filesystem::path& particles_path,
                               long long event_id = 0);

// Writes hits/truth/particles CSVs with the exact TrackML headers, so toy
// events round-trip through load_trackml_event.
void write_trackml_event(const EventRecord& event,
                         const std::filesystem::path& dir);

// eventXXXXXXXXX file name prefix for an event id.
std::string event_prefix(long long event_id);

}  // namespace qtrack::trackdata
