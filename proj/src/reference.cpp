#include "qtrack/reference.hpp"

#include "qtrack/errors.hpp"

namespace qtrack::reference {

std::vector<double> edge_network(const Matrix& state,
                                 const qgnn::EdgeList& edges,
                                 const qgnn::Model& model,
                                 const qgnn::ModelParams& p) {
  const std::size_t d = state.cols;
  std::vector<double> scores(edges.size());
  std::vector<double> features(2 * d);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [j, k] = edges[e];
    if (j < 0 || k < 0 || static_cast<std::size_t>(j) >= state.rows ||
        static_cast<std::size_t>(k) >= state.rows) {
      throw IndexError("edge_network: edge references missing node");
    }
    for (std::size_t c = 0; c < d; ++c) {
      features[c] = state(static_cast<std::size_t>(j), c);
      features[d + c] = state(static_cast<std::size_t>(k), c);
    }
    scores[e] = qgnn::eval_edge_block(model, p, features)[0];
  }
  return scores;
}

Matrix node_network(const Matrix& state, const qgnn::EdgeList& edges,
                    std::span<const double> scores, const qgnn::Model& model,
                    const qgnn::ModelParams& p) {
  if (scores.size() != edges.size()) {
    throw ArityError("node_network: scores/edges length mismatch");
  }
  const Matrix trip = qgnn::triplet_features(state, edges, scores);
  Matrix next(state.rows, state.cols);
  for (std::size_t i = 0; i < state.rows; ++i) {
    const std::vector<double> hidden = qgnn::eval_node_block(
        model, p, std::span<const double>(trip.row(i), trip.cols));
    for (std::size_t c = 0; c < 3; ++c) next(i, c) = state(i, c);
    for (std::size_t h = 0; h < hidden.size(); ++h) next(i, 3 + h) = hidden[h];
  }
  return next;
}

std::vector<double> forward(const graphbuild::SubGraph& graph,
                            const qgnn::Model& model,
                            const qgnn::ModelParams& p) {
  if (!graph.scaled) {
    throw RangeError("forward: subgraph features must be scaled to [0,1]");
  }
  Matrix state = qgnn::input_network(graph.node_features, model.config, p);
  for (int it = 0; it < model.config.n_iterations; ++it) {
    const std::vector<double> scores =
        reference::edge_network(state, graph.edges, model, p);
    state = reference::node_network(state, graph.edges, scores, model, p);
  }
  return reference::edge_network(state, graph.edges, model, p);
}

}  // namespace qtrack::reference
