#pragma once

#include <filesystem>
#include <numbers>
#include <set>
#include <utility>
#include <vector>

#include "qtrack/matrix.hpp"
#include "qtrack/trackdata.hpp"

namespace qtrack::graphbuild {

struct SelectionCuts {
  double pt_min = 1.0;              // GeV
  double dphi_slope_max = 0.0006;   // |dphi/dr| in 1/mm
  double z0_max = 100.0;            // mm
  double eta_min = -5.0, eta_max = 5.0;
  std::set<int> barrel_volumes = {8, 13, 17};
};

struct SliceSpec {
  int n_phi = 8;
  int n_z = 2;
};

struct GraphMeta {
  long long event_id = 0;
  int phi_index = 0, z_index = 0;
  // Scaling bounds recorded with the graph; phi bounds are the slice's
  // sector, r and z are fixed global bounds.
  double r_min = 0.0, r_max = 1100.0;
  double phi_min = -std::numbers::pi, phi_max = std::numbers::pi;
  double z_min = -1100.0, z_max = 1100.0;
};

// node_features columns are (r, phi, z), raw until scale_features is applied.
struct SubGraph {
  Matrix node_features;
  std::vector<std::pair<int, int>> edges;  // inner -> outer node index
  std::vector<int> labels;                 // 0/1, aligned with edges
  GraphMeta meta;
  bool scaled = false;
};

// Internal edge candidate with the geometric quantities the cuts act on.
struct Doublet {
  int inner = 0, outer = 0;  // indices into the event's hit list
  double dphi = 0.0, dr = 0.0, z0 = 0.0;
};

// Keeps barrel hits passing the pt and eta cuts, drops noise, and keeps one
// lowest-|z| hit per (particle, layer).
trackdata::EventRecord select_hits(const trackdata::EventRecord& event,
                                   const SelectionCuts& cuts);

// All adjacent-layer hit pairs passing the dphi-slope and z0 cuts. Hits are
// assumed already selected.
std::vector<Doublet> build_doublets(const trackdata::EventRecord& event,
                                    const SelectionCuts& cuts);

std::vector<int> label_edges(const std::vector<Doublet>& edges,
                             const trackdata::EventRecord& event);

// Partitions hits into n_phi uniform phi sectors times n_z uniform z bins
// (default 2, split at z = 0), builds doublets within each slice, labels
// them, and returns one unscaled SubGraph per slice in (phi, z) index order.
std::vector<SubGraph> slice_event(const trackdata::EventRecord& event,
                                  const SliceSpec& spec,
                                  const SelectionCuts& cuts);

// Min-max scales node features into [0,1] against the bounds in meta.
// Idempotent; throws RangeError on out-of-bounds values.
SubGraph scale_features(const SubGraph& graph);

void write_graph(const SubGraph& graph, const std::filesystem::path& path);
SubGraph read_graph(const std::filesystem::path& path);

// wrap to (-pi, pi]
double wrap_angle(double phi);

}  // namespace qtrack::graphbuild
