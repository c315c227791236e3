#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "qtrack/errors.hpp"
#include "qtrack/graphbuild.hpp"
#include "qtrack/trackdata.hpp"

using namespace qtrack;
using namespace qtrack::graphbuild;
using trackdata::EventRecord;
using trackdata::Hit;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

Hit make_hit(int id, double r, double phi, double z, int layer_idx,
             long long particle_id, double pt) {
  Hit h;
  h.hit_id = id;
  h.x = r * std::cos(phi);
  h.y = r * std::sin(phi);
  h.z = z;
  const auto [vol, lay] = trackdata::layer_label(layer_idx);
  h.volume_id = vol;
  h.layer_id = lay;
  h.module_id = 1;
  h.particle_id = particle_id;
  h.pt = pt;
  return h;
}

}  // namespace

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(pi) == doctest::Approx(pi));
  CHECK(wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
  // the seam: phi1 near +pi, phi2 near -pi differ by 0.002, not ~2pi
  CHECK(wrap_angle((-pi + 0.001) - (pi - 0.001)) == doctest::Approx(0.002));
}

TEST_CASE("selection keeps barrel hits above the pt cut") {
  EventRecord ev;
  ev.hits.push_back(make_hit(1, 32, 0.0, 10, 0, 5, 2.0));   // kept
  ev.hits.push_back(make_hit(2, 72, 0.1, 20, 1, 5, 2.0));   // kept
  ev.hits.push_back(make_hit(3, 116, 0.2, 30, 2, 6, 0.5));  // low pt
  Hit endcap = make_hit(4, 200, 0.0, 50, 3, 7, 3.0);
  endcap.volume_id = 7;  // not a barrel volume
  ev.hits.push_back(endcap);
  ev.hits.push_back(make_hit(5, 260, 0.0, 40, 4, 0, 3.0));  // noise id
  const SelectionCuts cuts;
  const EventRecord sel = select_hits(ev, cuts);
  REQUIRE(sel.hits.size() == 2);
  CHECK(sel.hits[0].hit_id == 1);
  CHECK(sel.hits[1].hit_id == 2);
}

TEST_CASE("selection keeps the lowest-|z| duplicate per layer") {
  EventRecord ev;
  ev.hits.push_back(make_hit(1, 32, 0.0, -15, 0, 5, 2.0));
  ev.hits.push_back(make_hit(2, 32, 0.0, 5, 0, 5, 2.0));  // same particle+layer
  const EventRecord sel = select_hits(ev, SelectionCuts{});
  REQUIRE(sel.hits.size() == 1);
  CHECK(sel.hits[0].hit_id == 2);
}

TEST_CASE("doublet geometry cuts") {
  const SelectionCuts cuts;
  EventRecord radial;
  radial.hits.push_back(make_hit(1, 32, 0.0, 0, 0, 5, 2.0));
  radial.hits.push_back(make_hit(2, 72, 0.0, 0, 1, 5, 2.0));
  auto edges = build_doublets(radial, cuts);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].z0 == doctest::Approx(0.0));
  CHECK(edges[0].dphi == doctest::Approx(0.0));

  // z0 = z1 - r1 (z2 - z1)/dr = 50 - 32 * 250/40 = -150, outside 100 mm
  EventRecord steep;
  steep.hits.push_back(make_hit(1, 32, 0.0, 50, 0, 5, 2.0));
  steep.hits.push_back(make_hit(2, 72, 0.0, 300, 1, 5, 2.0));
  CHECK(build_doublets(steep, cuts).empty());

  // dphi slope: 0.1 rad over 40 mm is far above the 0.0006/mm default
  EventRecord twisted;
  twisted.hits.push_back(make_hit(1, 32, 0.0, 0, 0, 5, 2.0));
  twisted.hits.push_back(make_hit(2, 72, 0.1, 0, 1, 5, 2.0));
  CHECK(build_doublets(twisted, cuts).empty());

  // only adjacent layers pair up
  EventRecord skip;
  skip.hits.push_back(make_hit(1, 32, 0.0, 0, 0, 5, 2.0));
  skip.hits.push_back(make_hit(2, 116, 0.0, 0, 2, 5, 2.0));
  CHECK(build_doublets(skip, cuts).empty());
}

TEST_CASE("edge-count monotonicity under loosened cuts") {
  trackdata::ToyConfig cfg;
  cfg.n_particles = 12;
  const EventRecord ev = select_hits(trackdata::generate_toy_event(cfg, 2),
                                     SelectionCuts{});
  SelectionCuts tight;
  SelectionCuts loose;
  loose.dphi_slope_max = 0.01;
  loose.z0_max = 500.0;
  CHECK(build_doublets(ev, loose).size() >= build_doublets(ev, tight).size());
}

TEST_CASE("truth labels require a shared nonzero particle id") {
  EventRecord ev;
  ev.hits.push_back(make_hit(1, 32, 0.0, 0, 0, 17, 2.0));
  ev.hits.push_back(make_hit(2, 72, 0.0, 0, 1, 17, 2.0));
  ev.hits.push_back(make_hit(3, 72, 0.0005, 1, 1, 18, 2.0));
  SelectionCuts loose;
  loose.dphi_slope_max = 0.01;
  loose.z0_max = 500.0;
  const auto edges = build_doublets(ev, loose);
  REQUIRE(edges.size() == 2);
  const auto labels = label_edges(edges, ev);
  // hits 1-2 share id 17; hits 1-3 differ
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const bool same = ev.hits[edges[i].inner].particle_id ==
                      ev.hits[edges[i].outer].particle_id;
    CHECK(labels[i] == (same ? 1 : 0));
  }
  // noise on both ends is never a true edge
  EventRecord noise = ev;
  noise.hits[0].particle_id = 0;
  noise.hits[1].particle_id = 0;
  const auto noise_labels = label_edges(build_doublets(noise, loose), noise);
  for (int l : noise_labels) CHECK(l == 0);
}

TEST_CASE("slicing partitions hits and drops cross-sector edges") {
  EventRecord ev;
  ev.event_id = 9;
  ev.hits.push_back(make_hit(1, 32, 0.1, 10, 0, 5, 2.0));
  ev.hits.push_back(make_hit(2, 72, 0.1, 20, 1, 5, 2.0));
  ev.hits.push_back(make_hit(3, 32, 2.0, -10, 0, 6, 2.0));
  const SelectionCuts cuts;

  const auto single = slice_event(ev, SliceSpec{1, 1}, cuts);
  REQUIRE(single.size() == 1);
  CHECK(single[0].node_features.rows == 3);

  const auto sliced = slice_event(ev, SliceSpec{8, 2}, cuts);
  REQUIRE(sliced.size() == 16);
  // phi = 0.1 lands in sector floor((0.1+pi)/(2pi/8)) = 4
  long long populated = 0;
  for (const SubGraph& g : sliced) {
    if (g.node_features.rows == 0) continue;
    ++populated;
    if (g.meta.phi_index == 4) CHECK(g.node_features.rows == 2);
  }
  CHECK(populated == 2);

  // a particle straddling two sectors loses its edge
  EventRecord straddle;
  straddle.hits.push_back(make_hit(1, 32, 2 * pi / 8 - 0.0005 - pi, 0, 0, 5, 2.0));
  straddle.hits.push_back(make_hit(2, 72, 2 * pi / 8 + 0.0005 - pi, 0, 1, 5, 2.0));
  long long edges_in_slices = 0;
  for (const SubGraph& g : slice_event(straddle, SliceSpec{8, 1}, cuts))
    edges_in_slices += static_cast<long long>(g.edges.size());
  CHECK(edges_in_slices == 0);
  CHECK(build_doublets(straddle, cuts).size() == 1);  // whole-event edge exists
}

TEST_CASE("feature scaling endpoints and idempotence") {
  SubGraph g;
  g.node_features = Matrix(3, 3);
  g.meta.phi_min = -pi;
  g.meta.phi_max = pi;
  // rows: (r, phi, z)
  g.node_features(0, 0) = 0.0;
  g.node_features(0, 1) = -pi;
  g.node_features(0, 2) = -1100.0;
  g.node_features(1, 0) = 1100.0;
  g.node_features(1, 1) = pi;
  g.node_features(1, 2) = 1100.0;
  g.node_features(2, 0) = 550.0;
  g.node_features(2, 1) = 0.0;
  g.node_features(2, 2) = 0.0;
  const SubGraph scaled = scale_features(g);
  CHECK(scaled.node_features(0, 0) == 0.0);
  CHECK(scaled.node_features(1, 0) == 1.0);
  CHECK(scaled.node_features(2, 0) == 0.5);
  CHECK(scaled.node_features(2, 2) == 0.5);
  CHECK(scaled.scaled);
  // idempotent
  const SubGraph twice = scale_features(scaled);
  CHECK(twice.node_features == scaled.node_features);

  SubGraph bad = g;
  bad.node_features(0, 0) = 2000.0;
  CHECK_THROWS_AS(scale_features(bad), RangeError);
}

TEST_CASE("graph files round trip") {
  const fs::path dir = fs::temp_directory_path() / "qtrack_test_graphio";
  fs::remove_all(dir);
  fs::create_directories(dir);

  trackdata::ToyConfig cfg;
  cfg.n_particles = 6;
  SelectionCuts loose;
  loose.dphi_slope_max = 0.01;
  loose.z0_max = 500.0;
  const EventRecord ev =
      select_hits(trackdata::generate_toy_event(cfg, 4), loose);
  const auto slices = slice_event(ev, SliceSpec{2, 1}, loose);
  REQUIRE(!slices.empty());
  const SubGraph g = scale_features(slices[0]);
  write_graph(g, dir / "a.graph");
  const SubGraph back = read_graph(dir / "a.graph");
  CHECK(back.node_features == g.node_features);
  CHECK(back.edges == g.edges);
  CHECK(back.labels == g.labels);
  CHECK(back.scaled == g.scaled);
  CHECK(back.meta.event_id == g.meta.event_id);

  // empty graph round trip
  SubGraph empty;
  empty.node_features = Matrix(0, 3);
  write_graph(empty, dir / "empty.graph");
  const SubGraph back_empty = read_graph(dir / "empty.graph");
  CHECK(back_empty.node_features.rows == 0);
  CHECK(back_empty.edges.empty());

  // truncation is reported as a parse error
  std::ifstream in(dir / "a.graph");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  in.close();
  std::ofstream(dir / "cut.graph") << text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(read_graph(dir / "cut.graph"), ParseError);

  // byte-identical rewrite
  write_graph(g, dir / "b.graph");
  std::ifstream fa(dir / "a.graph"), fb(dir / "b.graph");
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);
}

TEST_CASE("toy truth edges survive the default cuts within a slice") {
  trackdata::ToyConfig cfg;
  cfg.n_particles = 3;
  cfg.pt_min = cfg.pt_max = 1e5;  // straight tracks: dphi exactly 0
  cfg.z0_spread = 20.0;
  cfg.eta_max = 0.3;
  const SelectionCuts cuts;
  const EventRecord ev =
      select_hits(trackdata::generate_toy_event(cfg, 11), cuts);
  // consecutive same-particle layer pairs inside one slice appear as label-1
  const auto slices = slice_event(ev, SliceSpec{1, 1}, cuts);
  REQUIRE(slices.size() == 1);
  const SubGraph& g = slices[0];
  long long true_edges = 0;
  for (int l : g.labels) true_edges += l;
  long long expected = 0;
  for (const Hit& h : ev.hits) {
    // count pairs (this hit, same particle on the next layer)
    const int idx = trackdata::layer_index(h.volume_id, h.layer_id);
    for (const Hit& other : ev.hits) {
      if (other.particle_id == h.particle_id &&
          trackdata::layer_index(other.volume_id, other.layer_id) == idx + 1)
        ++expected;
    }
  }
  CHECK(true_edges == expected);
  CHECK(expected > 0);
}
