#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qtrack/graphbuild.hpp"
#include "qtrack/qgnn.hpp"

namespace qtrack::trainer {

// Scores are clamped to [kScoreClamp, 1 - kScoreClamp] before logarithms.
inline constexpr double kScoreClamp = 1e-7;

// Class weights w+ = E / (2 N+), w- = E / (2 N-); an absent class gets
// weight 0, so a single-class edge list is still well-defined.
std::pair<double, double> bce_class_weights(std::span<const int> labels);

double weighted_bce(std::span<const double> scores, std::span<const int> labels);

// Same loss with explicit class weights (the weighted form is linear in
// them, which the gradients inherit).
double weighted_bce_with_weights(std::span<const double> scores,
                                 std::span<const int> labels, double w_pos,
                                 double w_neg);

// dLoss/dscore per edge; zero where the clamp is active.
std::vector<double> weighted_bce_grad(std::span<const double> scores,
                                      std::span<const int> labels);
std::vector<double> weighted_bce_grad_with_weights(
    std::span<const double> scores, std::span<const int> labels, double w_pos,
    double w_neg);

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
  double lr = 0.03;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  AdamState() = default;
  AdamState(std::size_t n, double learning_rate)
      : m(n, 0.0), v(n, 0.0), lr(learning_rate) {}
};

// Standard bias-corrected update, in place.
void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> gradients;  // flat layout of qgnn::flatten_params
};

// Full reverse-mode gradient of the weighted BCE through the pipeline:
// loss -> scores -> edge-block Jacobians -> node states -> node-block
// Jacobians -> ... -> input network. Analytic mode only.
LossAndGrad loss_and_gradients(const graphbuild::SubGraph& graph,
                               const qgnn::Model& model,
                               const qgnn::ModelParams& params);

std::vector<double> model_gradients(const graphbuild::SubGraph& graph,
                                    const qgnn::Model& model,
                                    const qgnn::ModelParams& params);

// Max over parameters of |analytic - central difference| / (|analytic| + 1e-12).
double finite_diff_check(const graphbuild::SubGraph& graph,
                         const qgnn::Model& model,
                         const qgnn::ModelParams& params, double eps);

struct TrainConfig {
  int epochs = 1;
  double lr = 0.03;
  int validation_size = 200;
  // shuffle_seed fixes the validation split; order_seed drives the per-epoch
  // shuffles, so repeat runs can reorder training while sharing one
  // validation set.
  std::uint64_t shuffle_seed = 0;
  std::uint64_t order_seed = 0;
  int repeat_runs = 3;
  int val_every = 10;
  // Wall times are off by default so history files are byte-reproducible for
  // fixed seeds; turn on to record real timings.
  bool record_wall_time = false;
};

struct HistoryRecord {
  long step = 0;
  bool has_train = false;
  double train_loss = 0.0;
  bool has_val = false;
  double val_loss = 0.0;
  double val_auc = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<HistoryRecord> records;
};

struct TrainResult {
  qgnn::ModelParams params;
  TrainHistory history;
};

// One training run: seeded validation split, per-epoch shuffles, one Adam
// step per subgraph, validation every val_every steps plus at step 0 and the
// final step.
TrainResult train(const std::vector<graphbuild::SubGraph>& dataset,
                  const TrainConfig& config, const qgnn::ModelConfig& model_config,
                  std::uint64_t init_seed);

// Mean loss and pooled AUC over a set of graphs.
std::pair<double, double> evaluate(const std::vector<graphbuild::SubGraph>& graphs,
                                   const qgnn::Model& model,
                                   const qgnn::ModelParams& params);

// CSV: run,step,train_loss,val_loss,val_auc,seconds (absent fields empty).
void write_history_csv(const std::filesystem::path& path, int run_index,
                       const TrainHistory& history);

}  // namespace qtrack::trainer
