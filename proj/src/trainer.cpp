#include "qtrack/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "qtrack/errors.hpp"
#include "qtrack/metrics.hpp"
#include "qtrack/rng.hpp"

namespace qtrack::trainer {

namespace {

double clamp_score(double s) {
  return std::clamp(s, kScoreClamp, 1.0 - kScoreClamp);
}

void check_pair(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty()) throw ArityError("weighted_bce: empty edge list");
  if (scores.size() != labels.size()) {
    throw ArityError("weighted_bce: scores/labels length mismatch");
  }
}

void write_full(std::ostream& os, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  os.write(buf, end - buf);
}

}  // namespace

std::pair<double, double> bce_class_weights(std::span<const int> labels) {
  const double e = static_cast<double>(labels.size());
  double n_pos = 0.0;
  for (int y : labels) n_pos += y ? 1.0 : 0.0;
  const double n_neg = e - n_pos;
  const double w_pos = n_pos > 0.0 ? e / (2.0 * n_pos) : 0.0;
  const double w_neg = n_neg > 0.0 ? e / (2.0 * n_neg) : 0.0;
  return {w_pos, w_neg};
}

double weighted_bce_with_weights(std::span<const double> scores,
                                 std::span<const int> labels, double w_pos,
                                 double w_neg) {
  check_pair(scores, labels);
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = clamp_score(scores[i]);
    if (labels[i]) {
      sum += w_pos * std::log(p);
    } else {
      sum += w_neg * std::log(1.0 - p);
    }
  }
  return -sum / static_cast<double>(scores.size());
}

double weighted_bce(std::span<const double> scores, std::span<const int> labels) {
  check_pair(scores, labels);
  const auto [w_pos, w_neg] = bce_class_weights(labels);
  return weighted_bce_with_weights(scores, labels, w_pos, w_neg);
}

std::vector<double> weighted_bce_grad_with_weights(
    std::span<const double> scores, std::span<const int> labels, double w_pos,
    double w_neg) {
  check_pair(scores, labels);
  const double e = static_cast<double>(scores.size());
  std::vector<double> grad(scores.size(), 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    if (s <= kScoreClamp || s >= 1.0 - kScoreClamp) continue;  // clamp region
    grad[i] = labels[i] ? -w_pos / (s * e) : w_neg / ((1.0 - s) * e);
  }
  return grad;
}

std::vector<double> weighted_bce_grad(std::span<const double> scores,
                                      std::span<const int> labels) {
  const auto [w_pos, w_neg] = bce_class_weights(labels);
  return weighted_bce_grad_with_weights(scores, labels, w_pos, w_neg);
}

void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ArityError("adam_step: length mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

namespace {

// Gradient bookkeeping for one graph. dims: d = 3 + n_hidden.
struct BackwardScratch {
  Matrix d_state;  // N x d, gradient wrt the current node-state matrix
  std::vector<double> edge_param_grad;
  std::vector<double> node_param_grad;
};

// Accumulates edge-block gradients: param grads and d_state at both
// endpoints. Per-edge buffers are filled in parallel and reduced serially in
// edge order so results do not depend on the thread count.
void edge_backward(const Matrix& state, const qgnn::EdgeList& edges,
                   std::span<const double> score_grads,
                   const qgnn::Model& model, const qgnn::ModelParams& params,
                   BackwardScratch& scratch) {
  const std::size_t d = state.cols;
  const std::size_t n_edges = edges.size();
  const std::size_t n_params = scratch.edge_param_grad.size();
  std::vector<double> per_edge_params(n_edges * n_params);
  std::vector<double> per_edge_feat(n_edges * 2 * d);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t e = 0; e < n_edges; ++e) {
    const auto [j, k] = edges[e];
    std::vector<double> features(2 * d);
    for (std::size_t c = 0; c < d; ++c) {
      features[c] = state(static_cast<std::size_t>(j), c);
      features[d + c] = state(static_cast<std::size_t>(k), c);
    }
    const circuits::QnnJacobian jac =
        qgnn::edge_block_jacobian(model, params, features);
    const double g = score_grads[e];
    for (std::size_t p = 0; p < n_params; ++p) {
      per_edge_params[e * n_params + p] = g * jac.d_params(0, p);
    }
    for (std::size_t c = 0; c < 2 * d; ++c) {
      per_edge_feat[e * 2 * d + c] = g * jac.d_features(0, c);
    }
  }
  for (std::size_t e = 0; e < n_edges; ++e) {
    const auto [j, k] = edges[e];
    for (std::size_t p = 0; p < n_params; ++p) {
      scratch.edge_param_grad[p] += per_edge_params[e * n_params + p];
    }
    for (std::size_t c = 0; c < d; ++c) {
      scratch.d_state(static_cast<std::size_t>(j), c) += per_edge_feat[e * 2 * d + c];
      scratch.d_state(static_cast<std::size_t>(k), c) += per_edge_feat[e * 2 * d + d + c];
    }
  }
}

// Backward through one node-network application. `state` is the input node
// matrix H, `scores` the edge scores used for aggregation, `out_grad` the
// gradient wrt the node network's output. Produces the gradient wrt `state`
// into scratch.d_state, adds node-block param grads, and returns the
// gradient wrt the scores.
std::vector<double> node_backward(const Matrix& state,
                                  const qgnn::EdgeList& edges,
                                  std::span<const double> scores,
                                  const Matrix& out_grad,
                                  const qgnn::Model& model,
                                  const qgnn::ModelParams& params,
                                  BackwardScratch& scratch) {
  const std::size_t d = state.cols;
  const std::size_t n = state.rows;
  const std::size_t nh = d - 3;
  const Matrix trip = qgnn::triplet_features(state, edges, scores);

  std::vector<double> sum_in(n, 0.0), sum_out(n, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    sum_in[static_cast<std::size_t>(edges[e].second)] += scores[e];
    sum_out[static_cast<std::size_t>(edges[e].first)] += scores[e];
  }

  // Per-node: pull the hidden-output gradient through the node block.
  const std::size_t n_params = scratch.node_param_grad.size();
  std::vector<double> per_node_params(n * n_params);
  Matrix g_trip(n, 3 * d);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    const circuits::QnnJacobian jac = qgnn::node_block_jacobian(
        model, params, std::span<const double>(trip.row(i), trip.cols));
    for (std::size_t h = 0; h < nh; ++h) {
      const double g = out_grad(i, 3 + h);
      if (g == 0.0) continue;
      for (std::size_t p = 0; p < n_params; ++p) {
        per_node_params[i * n_params + p] += g * jac.d_params(h, p);
      }
      for (std::size_t c = 0; c < 3 * d; ++c) {
        g_trip(i, c) += g * jac.d_features(h, c);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < n_params; ++p) {
      scratch.node_param_grad[p] += per_node_params[i * n_params + p];
    }
  }

  // Scatter the triplet gradient back to the input state and the scores.
  std::vector<double> score_grads(edges.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    // spatial pass-through and the self segment
    for (std::size_t c = 0; c < 3; ++c) {
      scratch.d_state(i, c) += out_grad(i, c);
    }
    for (std::size_t c = 0; c < d; ++c) {
      scratch.d_state(i, c) += g_trip(i, d + c);
    }
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [j, k] = edges[e];
    const double s = scores[e];
    // inbound aggregate of node k
    {
      const double total = sum_in[static_cast<std::size_t>(k)];
      const double denom = std::max(1.0, total);
      const bool norm_active = total > 1.0;
      double ds = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double g = g_trip(static_cast<std::size_t>(k), c);
        scratch.d_state(static_cast<std::size_t>(j), c) += g * s / denom;
        const double h_in = trip(static_cast<std::size_t>(k), c);
        ds += g * (state(static_cast<std::size_t>(j), c) -
                   (norm_active ? h_in : 0.0)) / denom;
      }
      score_grads[e] += ds;
    }
    // outbound aggregate of node j
    {
      const double total = sum_out[static_cast<std::size_t>(j)];
      const double denom = std::max(1.0, total);
      const bool norm_active = total > 1.0;
      double ds = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double g = g_trip(static_cast<std::size_t>(j), 2 * d + c);
        scratch.d_state(static_cast<std::size_t>(k), c) += g * s / denom;
        const double h_out = trip(static_cast<std::size_t>(j), 2 * d + c);
        ds += g * (state(static_cast<std::size_t>(k), c) -
                   (norm_active ? h_out : 0.0)) / denom;
      }
      score_grads[e] += ds;
    }
  }
  return score_grads;
}

}  // namespace

LossAndGrad loss_and_gradients(const graphbuild::SubGraph& graph,
                               const qgnn::Model& model,
                               const qgnn::ModelParams& params) {
  if (!model.config.classical &&
      model.config.mode.kind != circuits::EvalMode::Analytic) {
    throw UnsupportedModeError(
        "gradients require analytic expectations; shot mode is forward-only");
  }
  if (graph.edges.empty()) {
    throw ArityError("loss_and_gradients: graph has no edges");
  }
  const int iters = model.config.n_iterations;
  const std::size_t d = static_cast<std::size_t>(model.config.feature_dim());

  // Forward, keeping the per-iteration states and scores.
  std::vector<Matrix> states;
  states.push_back(qgnn::input_network(graph.node_features, model.config, params));
  std::vector<std::vector<double>> iter_scores;
  for (int l = 0; l < iters; ++l) {
    iter_scores.push_back(qgnn::edge_network(states.back(), graph.edges, model, params));
    states.push_back(qgnn::node_network(states.back(), graph.edges,
                                        iter_scores.back(), model, params));
  }
  const std::vector<double> final_scores =
      qgnn::edge_network(states.back(), graph.edges, model, params);
  const double loss = weighted_bce(final_scores, graph.labels);

  BackwardScratch scratch;
  scratch.d_state = Matrix(states.back().rows, d);
  scratch.edge_param_grad.assign(static_cast<std::size_t>(model.edge_param_size()), 0.0);
  scratch.node_param_grad.assign(static_cast<std::size_t>(model.node_param_size()), 0.0);

  const std::vector<double> loss_grad = weighted_bce_grad(final_scores, graph.labels);
  edge_backward(states.back(), graph.edges, loss_grad, model, params, scratch);

  for (int l = iters - 1; l >= 0; --l) {
    const Matrix out_grad = std::move(scratch.d_state);
    scratch.d_state = Matrix(states.back().rows, d);
    std::vector<double> score_grads = node_backward(
        states[static_cast<std::size_t>(l)], graph.edges,
        iter_scores[static_cast<std::size_t>(l)], out_grad, model, params, scratch);
    edge_backward(states[static_cast<std::size_t>(l)], graph.edges, score_grads,
                  model, params, scratch);
  }

  // Input network: hidden columns are logistic(spatial . W + b).
  const int nh = model.config.n_hidden;
  Matrix d_w(3, static_cast<std::size_t>(nh));
  std::vector<double> d_b(static_cast<std::size_t>(nh), 0.0);
  const Matrix& h0 = states.front();
  for (std::size_t i = 0; i < h0.rows; ++i) {
    for (int j = 0; j < nh; ++j) {
      const double a = h0(i, static_cast<std::size_t>(3 + j));
      const double dz = scratch.d_state(i, static_cast<std::size_t>(3 + j)) * a * (1.0 - a);
      d_b[static_cast<std::size_t>(j)] += dz;
      for (std::size_t c = 0; c < 3; ++c) {
        d_w(c, static_cast<std::size_t>(j)) += dz * graph.node_features(i, c);
      }
    }
  }

  LossAndGrad result;
  result.loss = loss;
  result.gradients.reserve(model.total_param_count());
  result.gradients.insert(result.gradients.end(), d_w.data.begin(), d_w.data.end());
  result.gradients.insert(result.gradients.end(), d_b.begin(), d_b.end());
  result.gradients.insert(result.gradients.end(), scratch.edge_param_grad.begin(),
                          scratch.edge_param_grad.end());
  result.gradients.insert(result.gradients.end(), scratch.node_param_grad.begin(),
                          scratch.node_param_grad.end());
  return result;
}

std::vector<double> model_gradients(const graphbuild::SubGraph& graph,
                                    const qgnn::Model& model,
                                    const qgnn::ModelParams& params) {
  return loss_and_gradients(graph, model, params).gradients;
}

double finite_diff_check(const graphbuild::SubGraph& graph,
                         const qgnn::Model& model,
                         const qgnn::ModelParams& params, double eps) {
  const LossAndGrad analytic = loss_and_gradients(graph, model, params);
  std::vector<double> flat = qgnn::flatten_params(model, params);
  double worst = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double orig = flat[i];
    auto loss_at = [&](double shift) {
      flat[i] = orig + shift;
      const qgnn::ModelParams shifted = qgnn::unflatten_params(model, flat);
      return weighted_bce(qgnn::forward(graph, model, shifted), graph.labels);
    };
    // fourth-order central stencil: tiny gradient components would otherwise
    // drown in the roundoff of a plain two-point difference
    const double fd = (loss_at(-2 * eps) - 8.0 * loss_at(-eps) +
                       8.0 * loss_at(eps) - loss_at(2 * eps)) /
                      (12.0 * eps);
    flat[i] = orig;
    const double a = analytic.gradients[i];
    worst = std::max(worst, std::abs(a - fd) / (std::abs(a) + 1e-12));
  }
  return worst;
}

std::pair<double, double> evaluate(const std::vector<graphbuild::SubGraph>& graphs,
                                   const qgnn::Model& model,
                                   const qgnn::ModelParams& params) {
  if (graphs.empty()) throw ArityError("evaluate: no graphs");
  double loss_sum = 0.0;
  std::vector<double> all_scores;
  std::vector<int> all_labels;
  for (const auto& g : graphs) {
    const std::vector<double> scores = qgnn::forward(g, model, params);
    loss_sum += weighted_bce(scores, g.labels);
    all_scores.insert(all_scores.end(), scores.begin(), scores.end());
    all_labels.insert(all_labels.end(), g.labels.begin(), g.labels.end());
  }
  const double auc = metrics::auc(all_scores, all_labels);
  return {loss_sum / static_cast<double>(graphs.size()), auc};
}

TrainResult train(const std::vector<graphbuild::SubGraph>& dataset,
                  const TrainConfig& config, const qgnn::ModelConfig& model_config,
                  std::uint64_t init_seed) {
  if (static_cast<int>(dataset.size()) <= config.validation_size) {
    throw ArityError("train: dataset must be larger than the validation set");
  }
  Rng split_rng(config.shuffle_seed);
  std::vector<std::size_t> indices(dataset.size());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  qtrack::shuffle(indices, split_rng);
  std::vector<graphbuild::SubGraph> val_set;
  std::vector<std::size_t> train_pool;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i < static_cast<std::size_t>(config.validation_size)) {
      val_set.push_back(dataset[indices[i]]);
    } else {
      train_pool.push_back(indices[i]);
    }
  }
  if (train_pool.empty()) throw ArityError("train: empty training split");

  const qgnn::Model model(model_config);
  qgnn::ModelParams params = qgnn::init_params(model, init_seed);
  std::vector<double> flat = qgnn::flatten_params(model, params);
  AdamState adam(flat.size(), config.lr);

  TrainResult result;
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    if (!config.record_wall_time) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
        .count();
  };
  auto record_validation = [&](long step) {
    const auto [val_loss, val_auc] =
        evaluate(val_set, model, qgnn::unflatten_params(model, flat));
    HistoryRecord rec;
    rec.step = step;
    rec.has_val = true;
    rec.val_loss = val_loss;
    rec.val_auc = val_auc;
    rec.seconds = elapsed();
    result.history.records.push_back(rec);
  };

  if (!val_set.empty()) record_validation(0);
  long step = 0;
  const long total_steps =
      static_cast<long>(config.epochs) * static_cast<long>(train_pool.size());
  Rng order_rng(config.order_seed);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    qtrack::shuffle(train_pool, order_rng);
    for (std::size_t idx : train_pool) {
      const qgnn::ModelParams current = qgnn::unflatten_params(model, flat);
      const LossAndGrad lg = loss_and_gradients(dataset[idx], model, current);
      adam_step(flat, lg.gradients, adam);
      ++step;
      HistoryRecord rec;
      rec.step = step;
      rec.has_train = true;
      rec.train_loss = lg.loss;
      rec.seconds = elapsed();
      result.history.records.push_back(rec);
      if (!val_set.empty() &&
          (step % config.val_every == 0 || step == total_steps)) {
        record_validation(step);
      }
    }
  }
  result.params = qgnn::unflatten_params(model, flat);
  return result;
}

void write_history_csv(const std::filesystem::path& path, int run_index,
                       const TrainHistory& history) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write history " + path.string());
  os << "run,step,train_loss,val_loss,val_auc,seconds\n";
  for (const HistoryRecord& rec : history.records) {
    os << run_index << ',' << rec.step << ',';
    if (rec.has_train) write_full(os, rec.train_loss);
    os << ',';
    if (rec.has_val) write_full(os, rec.val_loss);
    os << ',';
    if (rec.has_val) write_full(os, rec.val_auc);
    os << ',';
    write_full(os, rec.seconds);
    os << '\n';
  }
}

}  // namespace qtrack::trainer
