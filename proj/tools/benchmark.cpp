// Timing comparison of the OpenMP edge/node kernels against the serial
// reference implementation, on a synthetic random geometric graph. Also
// asserts the two paths agree bit-for-bit, since that is the whole point of
// keeping the reference around.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "qtrack/qgnn.hpp"
#include "qtrack/reference.hpp"
#include "qtrack/rng.hpp"

using namespace qtrack;

namespace {

graphbuild::SubGraph make_graph(int n_nodes, int n_edges, std::uint64_t seed) {
  Rng rng(seed);
  graphbuild::SubGraph g;
  g.node_features = Matrix(n_nodes, 3);
  for (double& v : g.node_features.data) v = uniform01(rng);
  for (int e = 0; e < n_edges; ++e) {
    const int a = static_cast<int>(uniform_index(rng, n_nodes));
    int b = static_cast<int>(uniform_index(rng, n_nodes));
    if (b == a) b = (b + 1) % n_nodes;
    g.edges.emplace_back(a, b);
    g.labels.push_back(e % 2);
  }
  g.scaled = true;  // features already drawn in [0,1]
  return g;
}

double time_ms(const auto& fn, int reps) {
  // One warm-up call, then the best of `reps` timed calls.
  fn();
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int n_nodes = 120, n_edges = 240, reps = 3;
  bool classical = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--nodes" && i + 1 < argc) n_nodes = std::atoi(argv[++i]);
    else if (arg == "--edges" && i + 1 < argc) n_edges = std::atoi(argv[++i]);
    else if (arg == "--reps" && i + 1 < argc) reps = std::atoi(argv[++i]);
    else if (arg == "--classical") classical = true;
    else {
      std::fprintf(stderr,
                   "usage: %s [--nodes N] [--edges E] [--reps R] [--classical]\n",
                   argv[0]);
      return 1;
    }
  }

  qgnn::ModelConfig mc;
  mc.classical = classical;
  const qgnn::Model model(mc);
  const qgnn::ModelParams params = qgnn::init_params(model, 7);
  const graphbuild::SubGraph graph = make_graph(n_nodes, n_edges, 11);

  const Matrix state = qgnn::input_network(graph.node_features, mc, params);
  const std::vector<double> scores =
      qgnn::edge_network(state, graph.edges, model, params);

  std::printf("graph: %d nodes, %d edges; model: %s; threads: %d\n", n_nodes,
              n_edges, classical ? "classical" : "quantum (TTN)",
              omp_get_max_threads());

  const double edge_par = time_ms(
      [&] { (void)qgnn::edge_network(state, graph.edges, model, params); },
      reps);
  const double edge_ser = time_ms(
      [&] { (void)reference::edge_network(state, graph.edges, model, params); },
      reps);
  const double node_par = time_ms(
      [&] {
        (void)qgnn::node_network(state, graph.edges, scores, model, params);
      },
      reps);
  const double node_ser = time_ms(
      [&] {
        (void)reference::node_network(state, graph.edges, scores, model, params);
      },
      reps);

  const bool edges_match =
      qgnn::edge_network(state, graph.edges, model, params) ==
      reference::edge_network(state, graph.edges, model, params);
  const bool nodes_match =
      qgnn::node_network(state, graph.edges, scores, model, params) ==
      reference::node_network(state, graph.edges, scores, model, params);
  const bool full_match = qgnn::forward(graph, model, params) ==
                          reference::forward(graph, model, params);

  std::printf("edge network: parallel %.3f ms, serial %.3f ms, speedup %.2fx\n",
              edge_par, edge_ser, edge_ser / edge_par);
  std::printf("node network: parallel %.3f ms, serial %.3f ms, speedup %.2fx\n",
              node_par, node_ser, node_ser / node_par);
  std::printf("bit-exact match: edge %s, node %s, full forward %s\n",
              edges_match ? "yes" : "NO", nodes_match ? "yes" : "NO",
              full_match ? "yes" : "NO");
  return (edges_match && nodes_match && full_match) ? 0 : 3;
}
