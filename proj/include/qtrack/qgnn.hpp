#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "qtrack/circuits.hpp"
#include "qtrack/graphbuild.hpp"
#include "qtrack/matrix.hpp"

namespace qtrack::qgnn {

struct ModelConfig {
  int n_hidden = 1;
  int n_iterations = 1;
  circuits::AnsatzKind ansatz = circuits::AnsatzKind::TTN;
  circuits::EvalMode mode = circuits::EvalMode::analytic();
  bool classical = false;

  int feature_dim() const { return 3 + n_hidden; }
  int edge_width() const { return 2 * feature_dim(); }
  int node_width() const { return 3 * feature_dim(); }
};

struct ModelParams {
  Matrix input_w;                // 3 x n_hidden
  std::vector<double> input_b;   // n_hidden
  std::vector<double> edge_params;
  std::vector<double> node_params;
};

// Two-layer perceptron with logistic activations on both layers; the
// classical stand-in for a QNN block. Parameter packing: W1 (in x hidden,
// row-major), b1, W2 (hidden x out, row-major), b2.
struct MlpShape {
  int in = 0, hidden = 0, out = 0;
  int param_count() const { return in * hidden + hidden + hidden * out + out; }
};

std::vector<double> mlp_forward(const MlpShape& shape,
                                std::span<const double> params,
                                std::span<const double> x);
circuits::QnnJacobian mlp_jacobian(const MlpShape& shape,
                                   std::span<const double> params,
                                   std::span<const double> x);

// Immutable per-config state: PQC templates (quantum) or MLP shapes
// (classical). Shareable across threads.
struct Model {
  ModelConfig config;
  circuits::PQCTemplate edge_pqc, node_pqc;  // quantum only
  MlpShape edge_mlp, node_mlp;               // classical only

  explicit Model(const ModelConfig& cfg);

  int edge_param_size() const;
  int node_param_size() const;
  std::size_t total_param_count() const;
};

ModelParams init_params(const Model& model, std::uint64_t seed);

std::vector<double> flatten_params(const Model& model, const ModelParams& p);
ModelParams unflatten_params(const Model& model, std::span<const double> flat);

// One evaluation of the edge (node) block on a single feature vector.
// Quantum: qnn_forward; classical: mlp_forward. The Jacobian variants are
// analytic-mode only.
std::vector<double> eval_edge_block(const Model& model, const ModelParams& p,
                                    std::span<const double> features);
std::vector<double> eval_node_block(const Model& model, const ModelParams& p,
                                    std::span<const double> features);
circuits::QnnJacobian edge_block_jacobian(const Model& model,
                                          const ModelParams& p,
                                          std::span<const double> features);
circuits::QnnJacobian node_block_jacobian(const Model& model,
                                          const ModelParams& p,
                                          std::span<const double> features);

// Input network: hidden columns logistic(spatial * W + b) appended to the
// three (immutable) spatial columns.
Matrix input_network(const Matrix& spatial, const ModelConfig& config,
                     const ModelParams& p);

using EdgeList = std::vector<std::pair<int, int>>;

std::vector<double> edge_network(const Matrix& state, const EdgeList& edges,
                                 const Model& model, const ModelParams& p);

// Score-weighted neighbor aggregation feeding the node block; spatial
// columns pass through unchanged.
Matrix node_network(const Matrix& state, const EdgeList& edges,
                    std::span<const double> scores, const Model& model,
                    const ModelParams& p);

// concat(h_in, H[i], h_out) per node; exposed for the gradient pass.
Matrix triplet_features(const Matrix& state, const EdgeList& edges,
                        std::span<const double> scores);

// Full pipeline: input network, then N_iterations of (edge, node), then a
// final edge pass producing the returned scores.
std::vector<double> forward(const graphbuild::SubGraph& graph,
                            const Model& model, const ModelParams& p);

void write_checkpoint(const std::filesystem::path& path,
                      const ModelConfig& config, const ModelParams& p);
std::pair<ModelConfig, ModelParams> read_checkpoint(
    const std::filesystem::path& path);

}  // namespace qtrack::qgnn
