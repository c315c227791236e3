#include "qtrack/qgnn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qtrack/errors.hpp"
#include "qtrack/rng.hpp"

namespace qtrack::qgnn {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void write_full(std::ostream& os, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  os.write(buf, end - buf);
}

}  // namespace

std::vector<double> mlp_forward(const MlpShape& shape,
                                std::span<const double> params,
                                std::span<const double> x) {
  if (params.size() != static_cast<std::size_t>(shape.param_count())) {
    throw ArityError("mlp_forward: param arity mismatch");
  }
  if (x.size() != static_cast<std::size_t>(shape.in)) {
    throw ArityError("mlp_forward: input arity mismatch");
  }
  const double* w1 = params.data();
  const double* b1 = w1 + shape.in * shape.hidden;
  const double* w2 = b1 + shape.hidden;
  const double* b2 = w2 + shape.hidden * shape.out;
  std::vector<double> a1(static_cast<std::size_t>(shape.hidden));
  for (int j = 0; j < shape.hidden; ++j) {
    double z = b1[j];
    for (int i = 0; i < shape.in; ++i) z += x[static_cast<std::size_t>(i)] * w1[i * shape.hidden + j];
    a1[static_cast<std::size_t>(j)] = logistic(z);
  }
  std::vector<double> out(static_cast<std::size_t>(shape.out));
  for (int k = 0; k < shape.out; ++k) {
    double z = b2[k];
    for (int j = 0; j < shape.hidden; ++j) z += a1[static_cast<std::size_t>(j)] * w2[j * shape.out + k];
    out[static_cast<std::size_t>(k)] = logistic(z);
  }
  return out;
}

circuits::QnnJacobian mlp_jacobian(const MlpShape& shape,
                                   std::span<const double> params,
                                   std::span<const double> x) {
  if (params.size() != static_cast<std::size_t>(shape.param_count())) {
    throw ArityError("mlp_jacobian: param arity mismatch");
  }
  const double* w1 = params.data();
  const double* b1 = w1 + shape.in * shape.hidden;
  const double* w2 = b1 + shape.hidden;
  const double* b2 = w2 + shape.hidden * shape.out;
  std::vector<double> a1(static_cast<std::size_t>(shape.hidden));
  for (int j = 0; j < shape.hidden; ++j) {
    double z = b1[j];
    for (int i = 0; i < shape.in; ++i) z += x[static_cast<std::size_t>(i)] * w1[i * shape.hidden + j];
    a1[static_cast<std::size_t>(j)] = logistic(z);
  }
  std::vector<double> out(static_cast<std::size_t>(shape.out));
  for (int k = 0; k < shape.out; ++k) {
    double z = b2[k];
    for (int j = 0; j < shape.hidden; ++j) z += a1[static_cast<std::size_t>(j)] * w2[j * shape.out + k];
    out[static_cast<std::size_t>(k)] = logistic(z);
  }

  circuits::QnnJacobian jac;
  jac.d_params = Matrix(static_cast<std::size_t>(shape.out), params.size());
  jac.d_features = Matrix(static_cast<std::size_t>(shape.out),
                          static_cast<std::size_t>(shape.in));
  const int w1_off = 0;
  const int b1_off = shape.in * shape.hidden;
  const int w2_off = b1_off + shape.hidden;
  const int b2_off = w2_off + shape.hidden * shape.out;
  for (int k = 0; k < shape.out; ++k) {
    const double s2 = out[static_cast<std::size_t>(k)] *
                      (1.0 - out[static_cast<std::size_t>(k)]);
    jac.d_params(static_cast<std::size_t>(k),
                 static_cast<std::size_t>(b2_off + k)) = s2;
    for (int j = 0; j < shape.hidden; ++j) {
      const double aj = a1[static_cast<std::size_t>(j)];
      jac.d_params(static_cast<std::size_t>(k),
                   static_cast<std::size_t>(w2_off + j * shape.out + k)) = s2 * aj;
      const double dz1 = s2 * w2[j * shape.out + k] * aj * (1.0 - aj);
      jac.d_params(static_cast<std::size_t>(k),
                   static_cast<std::size_t>(b1_off + j)) = dz1;
      for (int i = 0; i < shape.in; ++i) {
        jac.d_params(static_cast<std::size_t>(k),
                     static_cast<std::size_t>(w1_off + i * shape.hidden + j)) =
            dz1 * x[static_cast<std::size_t>(i)];
        jac.d_features(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) +=
            dz1 * w1[i * shape.hidden + j];
      }
    }
  }
  return jac;
}

Model::Model(const ModelConfig& cfg) : config(cfg) {
  if (cfg.n_hidden < 1) throw ConstructionError("n_hidden must be >= 1");
  if (cfg.n_iterations < 1) throw ConstructionError("n_iterations must be >= 1");
  if (cfg.classical) {
    edge_mlp = {cfg.edge_width(), cfg.feature_dim(), 1};
    node_mlp = {cfg.node_width(), cfg.feature_dim(), cfg.n_hidden};
  } else {
    edge_pqc = circuits::build_pqc(cfg.ansatz, cfg.edge_width(), 1);
    node_pqc = circuits::build_pqc(cfg.ansatz, cfg.node_width(), cfg.n_hidden);
  }
}

int Model::edge_param_size() const {
  return config.classical ? edge_mlp.param_count() : edge_pqc.n_params;
}

int Model::node_param_size() const {
  return config.classical ? node_mlp.param_count() : node_pqc.n_params;
}

std::size_t Model::total_param_count() const {
  return static_cast<std::size_t>(3 * config.n_hidden + config.n_hidden +
                                  edge_param_size() + node_param_size());
}

ModelParams init_params(const Model& model, std::uint64_t seed) {
  Rng rng(seed);
  const int nh = model.config.n_hidden;
  ModelParams p;
  p.input_w = Matrix(3, static_cast<std::size_t>(nh));
  for (double& w : p.input_w.data) w = uniform(rng, -1.0, 1.0);
  p.input_b.resize(static_cast<std::size_t>(nh));
  for (double& b : p.input_b) b = uniform(rng, -1.0, 1.0);
  p.edge_params.resize(static_cast<std::size_t>(model.edge_param_size()));
  p.node_params.resize(static_cast<std::size_t>(model.node_param_size()));
  if (model.config.classical) {
    // Small symmetric init keeps the logistic blocks away from saturation.
    for (double& v : p.edge_params) v = uniform(rng, -0.5, 0.5);
    for (double& v : p.node_params) v = uniform(rng, -0.5, 0.5);
  } else {
    for (double& v : p.edge_params) v = uniform(rng, 0.0, 4.0 * M_PI);
    for (double& v : p.node_params) v = uniform(rng, 0.0, 4.0 * M_PI);
  }
  return p;
}

std::vector<double> flatten_params(const Model& model, const ModelParams& p) {
  std::vector<double> flat;
  flat.reserve(model.total_param_count());
  flat.insert(flat.end(), p.input_w.data.begin(), p.input_w.data.end());
  flat.insert(flat.end(), p.input_b.begin(), p.input_b.end());
  flat.insert(flat.end(), p.edge_params.begin(), p.edge_params.end());
  flat.insert(flat.end(), p.node_params.begin(), p.node_params.end());
  return flat;
}

ModelParams unflatten_params(const Model& model, std::span<const double> flat) {
  if (flat.size() != model.total_param_count()) {
    throw ArityError("unflatten_params: size mismatch");
  }
  const int nh = model.config.n_hidden;
  ModelParams p;
  std::size_t at = 0;
  p.input_w = Matrix(3, static_cast<std::size_t>(nh));
  for (double& w : p.input_w.data) w = flat[at++];
  p.input_b.resize(static_cast<std::size_t>(nh));
  for (double& b : p.input_b) b = flat[at++];
  p.edge_params.resize(static_cast<std::size_t>(model.edge_param_size()));
  for (double& v : p.edge_params) v = flat[at++];
  p.node_params.resize(static_cast<std::size_t>(model.node_param_size()));
  for (double& v : p.node_params) v = flat[at++];
  return p;
}

std::vector<double> eval_edge_block(const Model& model, const ModelParams& p,
                                    std::span<const double> features) {
  if (model.config.classical) {
    return mlp_forward(model.edge_mlp, p.edge_params, features);
  }
  return circuits::qnn_forward(model.edge_pqc, features, p.edge_params,
                               model.config.mode);
}

std::vector<double> eval_node_block(const Model& model, const ModelParams& p,
                                    std::span<const double> features) {
  if (model.config.classical) {
    return mlp_forward(model.node_mlp, p.node_params, features);
  }
  return circuits::qnn_forward(model.node_pqc, features, p.node_params,
                               model.config.mode);
}

circuits::QnnJacobian edge_block_jacobian(const Model& model,
                                          const ModelParams& p,
                                          std::span<const double> features) {
  if (model.config.classical) {
    return mlp_jacobian(model.edge_mlp, p.edge_params, features);
  }
  return circuits::qnn_jacobian(model.edge_pqc, features, p.edge_params);
}

circuits::QnnJacobian node_block_jacobian(const Model& model,
                                          const ModelParams& p,
                                          std::span<const double> features) {
  if (model.config.classical) {
    return mlp_jacobian(model.node_mlp, p.node_params, features);
  }
  return circuits::qnn_jacobian(model.node_pqc, features, p.node_params);
}

Matrix input_network(const Matrix& spatial, const ModelConfig& config,
                     const ModelParams& p) {
  if (spatial.cols != 3) {
    throw ArityError("input_network: expected 3 spatial columns");
  }
  const int nh = config.n_hidden;
  Matrix state(spatial.rows, static_cast<std::size_t>(3 + nh));
  for (std::size_t i = 0; i < spatial.rows; ++i) {
    for (std::size_t c = 0; c < 3; ++c) state(i, c) = spatial(i, c);
    for (int j = 0; j < nh; ++j) {
      double z = p.input_b[static_cast<std::size_t>(j)];
      for (std::size_t c = 0; c < 3; ++c) {
        z += spatial(i, c) * p.input_w(c, static_cast<std::size_t>(j));
      }
      state(i, static_cast<std::size_t>(3 + j)) = logistic(z);
    }
  }
  return state;
}

std::vector<double> edge_network(const Matrix& state, const EdgeList& edges,
                                 const Model& model, const ModelParams& p) {
  const std::size_t d = state.cols;
  for (const auto& [j, k] : edges) {
    if (j < 0 || k < 0 || static_cast<std::size_t>(j) >= state.rows ||
        static_cast<std::size_t>(k) >= state.rows) {
      throw IndexError("edge_network: edge references missing node");
    }
  }
  std::vector<double> scores(edges.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [j, k] = edges[e];
    std::vector<double> features(2 * d);
    for (std::size_t c = 0; c < d; ++c) {
      features[c] = state(static_cast<std::size_t>(j), c);
      features[d + c] = state(static_cast<std::size_t>(k), c);
    }
    scores[e] = eval_edge_block(model, p, features)[0];
  }
  return scores;
}

Matrix triplet_features(const Matrix& state, const EdgeList& edges,
                        std::span<const double> scores) {
  const std::size_t d = state.cols;
  const std::size_t n = state.rows;
  Matrix trip(n, 3 * d);
  std::vector<double> sum_in(n, 0.0), sum_out(n, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [j, k] = edges[e];
    const double s = scores[e];
    sum_in[static_cast<std::size_t>(k)] += s;
    sum_out[static_cast<std::size_t>(j)] += s;
    for (std::size_t c = 0; c < d; ++c) {
      // weighted sums; normalized below
      trip(static_cast<std::size_t>(k), c) += s * state(static_cast<std::size_t>(j), c);
      trip(static_cast<std::size_t>(j), 2 * d + c) += s * state(static_cast<std::size_t>(k), c);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double din = std::max(1.0, sum_in[i]);
    const double dout = std::max(1.0, sum_out[i]);
    for (std::size_t c = 0; c < d; ++c) {
      // clamp shields the encoder's [0,1] check from roundoff in the
      // weighted mean; it never moves a value by more than one ulp
      trip(i, c) = std::clamp(trip(i, c) / din, 0.0, 1.0);
      trip(i, d + c) = state(i, c);
      trip(i, 2 * d + c) = std::clamp(trip(i, 2 * d + c) / dout, 0.0, 1.0);
    }
  }
  return trip;
}

Matrix node_network(const Matrix& state, const EdgeList& edges,
                    std::span<const double> scores, const Model& model,
                    const ModelParams& p) {
  if (scores.size() != edges.size()) {
    throw ArityError("node_network: scores/edges length mismatch");
  }
  const std::size_t d = state.cols;
  const Matrix trip = triplet_features(state, edges, scores);
  Matrix next(state.rows, d);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < state.rows; ++i) {
    const std::vector<double> hidden = eval_node_block(
        model, p, std::span<const double>(trip.row(i), trip.cols));
    for (std::size_t c = 0; c < 3; ++c) next(i, c) = state(i, c);
    for (std::size_t h = 0; h < hidden.size(); ++h) next(i, 3 + h) = hidden[h];
  }
  return next;
}

std::vector<double> forward(const graphbuild::SubGraph& graph,
                            const Model& model, const ModelParams& p) {
  if (!graph.scaled) {
    throw RangeError("forward: subgraph features must be scaled to [0,1]");
  }
  Matrix state = input_network(graph.node_features, model.config, p);
  for (int it = 0; it < model.config.n_iterations; ++it) {
    const std::vector<double> scores = edge_network(state, graph.edges, model, p);
    state = node_network(state, graph.edges, scores, model, p);
  }
  return edge_network(state, graph.edges, model, p);
}

void write_checkpoint(const std::filesystem::path& path,
                      const ModelConfig& config, const ModelParams& p) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write checkpoint " + path.string());
  os << "qtrack-model 1\n";
  os << "ansatz " << circuits::ansatz_name(config.ansatz) << "\n";
  os << "n_hidden " << config.n_hidden << "\n";
  os << "n_iterations " << config.n_iterations << "\n";
  os << "classical " << (config.classical ? 1 : 0) << "\n";
  auto dump = [&os](const std::string& tag, std::span<const double> v) {
    os << tag << " " << v.size() << "\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << " ";
      write_full(os, v[i]);
    }
    os << "\n";
  };
  dump("input_w", p.input_w.data);
  dump("input_b", p.input_b);
  dump("edge_params", p.edge_params);
  dump("node_params", p.node_params);
}

std::pair<ModelConfig, ModelParams> read_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  auto expect = [&in, &path](const std::string& tag) -> std::istringstream {
    std::string line;
    if (!std::getline(in, line)) {
      throw ParseError(path.string() + ": truncated checkpoint (wanted '" + tag + "')");
    }
    std::istringstream ss(line);
    std::string got;
    ss >> got;
    if (got != tag) {
      throw ParseError(path.string() + ": expected '" + tag + "', got '" + got + "'");
    }
    return ss;
  };
  {
    int version = 0;
    expect("qtrack-model") >> version;
    if (version != 1) throw ParseError(path.string() + ": unsupported checkpoint version");
  }
  ModelConfig config;
  {
    std::string name;
    expect("ansatz") >> name;
    config.ansatz = circuits::ansatz_from_name(name);
  }
  expect("n_hidden") >> config.n_hidden;
  expect("n_iterations") >> config.n_iterations;
  {
    int c = 0;
    expect("classical") >> c;
    config.classical = c != 0;
  }
  ModelParams p;
  auto load = [&](const std::string& tag, std::vector<double>& v) {
    std::size_t n = 0;
    expect(tag) >> n;
    v.resize(n);
    std::string line;
    if (!std::getline(in, line)) {
      throw ParseError(path.string() + ": truncated values for " + tag);
    }
    std::istringstream ss(line);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(ss >> v[i])) {
        throw ParseError(path.string() + ": malformed values for " + tag);
      }
    }
  };
  std::vector<double> w;
  load("input_w", w);
  if (w.size() != static_cast<std::size_t>(3 * config.n_hidden)) {
    throw CompatibilityError(path.string() + ": input_w size mismatch");
  }
  p.input_w = Matrix(3, static_cast<std::size_t>(config.n_hidden));
  p.input_w.data = std::move(w);
  load("input_b", p.input_b);
  load("edge_params", p.edge_params);
  load("node_params", p.node_params);
  const Model model(config);
  if (p.input_b.size() != static_cast<std::size_t>(config.n_hidden) ||
      p.edge_params.size() != static_cast<std::size_t>(model.edge_param_size()) ||
      p.node_params.size() != static_cast<std::size_t>(model.node_param_size())) {
    throw CompatibilityError(path.string() + ": parameter sizes do not match config");
  }
  return {config, p};
}

}  // namespace qtrack::qgnn
