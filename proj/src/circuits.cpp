#include "qtrack/circuits.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qtrack/errors.hpp"

namespace qtrack::circuits {

namespace {

constexpr double kPi = std::numbers::pi;

// Emits a two-qubit block: RY(p) on left, RY(p) on right, CNOT(left->right).
// Each RY gets its own fresh parameter slot.
void emit_block(std::vector<qsim::GateOp>& gates, int left, int right,
                int& next_param) {
  gates.push_back(qsim::GateOp::ry(left, qsim::AngleSource::param(next_param++)));
  gates.push_back(qsim::GateOp::ry(right, qsim::AngleSource::param(next_param++)));
  gates.push_back(qsim::GateOp::cnot(left, right));
}

// Ladder: blocks on (0,1), (1,2), ..., (n-2,n-1), then a final RY on the
// last qubit. Readouts are the tail of the ladder, qubit n-1 first.
void build_mps(PQCTemplate& t, int n_qubits, int n_readout, int& next_param) {
  auto& gates = t.circuit.gates;
  for (int b = 0; b + 1 < n_qubits; ++b) {
    emit_block(gates, b, b + 1, next_param);
  }
  gates.push_back(
      qsim::GateOp::ry(n_qubits - 1, qsim::AngleSource::param(next_param++)));
  for (int i = 0; i < n_readout; ++i) {
    t.readout_qubits.push_back(n_qubits - 1 - i);
  }
}

// Binary tree, generalized to arbitrary widths: at each level pair adjacent
// active qubits left-to-right, the right qubit of each pair survives, any
// unpaired qubit passes through. When fewer pairs than floor(size/2) are
// needed to land exactly on n_readout survivors, only the leftmost pairs are
// contracted. MERA additionally inserts a disentangler block across each
// boundary between adjacent pairs, before the level's tree blocks, so the TTN
// gate list stays a subsequence of the MERA one.
void build_tree(PQCTemplate& t, int n_qubits, int n_readout, bool mera,
                int& next_param) {
  auto& gates = t.circuit.gates;
  std::vector<int> active(static_cast<std::size_t>(n_qubits));
  for (int i = 0; i < n_qubits; ++i) active[static_cast<std::size_t>(i)] = i;

  while (static_cast<int>(active.size()) > n_readout) {
    const int size = static_cast<int>(active.size());
    const int n_pairs = std::min(size / 2, size - n_readout);
    if (mera) {
      for (int p = 0; p + 1 < n_pairs; ++p) {
        emit_block(gates, active[static_cast<std::size_t>(2 * p + 1)],
                   active[static_cast<std::size_t>(2 * p + 2)], next_param);
      }
    }
    std::vector<int> survivors;
    for (int p = 0; p < n_pairs; ++p) {
      const int left = active[static_cast<std::size_t>(2 * p)];
      const int right = active[static_cast<std::size_t>(2 * p + 1)];
      emit_block(gates, left, right, next_param);
      survivors.push_back(right);
    }
    for (int i = 2 * n_pairs; i < size; ++i) {
      survivors.push_back(active[static_cast<std::size_t>(i)]);
    }
    active = std::move(survivors);
  }
  for (int q : active) {
    gates.push_back(qsim::GateOp::ry(q, qsim::AngleSource::param(next_param++)));
  }
  t.readout_qubits = active;
}

}  // namespace

std::string ansatz_name(AnsatzKind kind) {
  switch (kind) {
    case AnsatzKind::MPS: return "MPS";
    case AnsatzKind::TTN: return "TTN";
    case AnsatzKind::MERA: return "MERA";
  }
  return "?";
}

AnsatzKind ansatz_from_name(const std::string& name) {
  if (name == "MPS" || name == "mps") return AnsatzKind::MPS;
  if (name == "TTN" || name == "ttn") return AnsatzKind::TTN;
  if (name == "MERA" || name == "mera") return AnsatzKind::MERA;
  throw ConstructionError("unknown ansatz: " + name);
}

std::vector<qsim::GateOp> encoder_gates(int n_qubits) {
  std::vector<qsim::GateOp> gates;
  gates.reserve(static_cast<std::size_t>(n_qubits));
  for (int q = 0; q < n_qubits; ++q) {
    gates.push_back(qsim::GateOp::ry(q, qsim::AngleSource::input(q)));
  }
  return gates;
}

void check_features(std::span<const double> features) {
  for (double f : features) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw RangeError("feature outside [0,1]: " + std::to_string(f));
    }
  }
}

PQCTemplate build_pqc(AnsatzKind kind, int n_qubits, int n_readout) {
  if (n_qubits < 2 || n_qubits > qsim::kMaxQubits) {
    throw ConstructionError("build_pqc: n_qubits must be in [2, " +
                            std::to_string(qsim::kMaxQubits) + "], got " +
                            std::to_string(n_qubits));
  }
  if (n_readout < 1 || n_readout > n_qubits) {
    throw ConstructionError("build_pqc: n_readout out of range");
  }
  PQCTemplate t;
  t.kind = kind;
  t.n_qubits = n_qubits;
  t.circuit.n_qubits = n_qubits;
  t.circuit.n_input_slots = n_qubits;
  t.circuit.gates = encoder_gates(n_qubits);

  int next_param = 0;
  switch (kind) {
    case AnsatzKind::MPS: build_mps(t, n_qubits, n_readout, next_param); break;
    case AnsatzKind::TTN: build_tree(t, n_qubits, n_readout, false, next_param); break;
    case AnsatzKind::MERA: build_tree(t, n_qubits, n_readout, true, next_param); break;
  }
  t.n_params = next_param;
  t.circuit.n_param_slots = next_param;
  t.circuit.validate();
  return t;
}

int param_count(AnsatzKind kind, int n_qubits, int n_readout) {
  return build_pqc(kind, n_qubits, n_readout).n_params;
}

std::vector<double> qnn_forward(const PQCTemplate& tmpl,
                                std::span<const double> features,
                                std::span<const double> params,
                                const EvalMode& mode) {
  if (features.size() != static_cast<std::size_t>(tmpl.n_qubits)) {
    throw ArityError("qnn_forward: expected " + std::to_string(tmpl.n_qubits) +
                     " features, got " + std::to_string(features.size()));
  }
  check_features(features);
  std::vector<double> angles(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) angles[i] = kPi * features[i];

  const qsim::Statevector state = qsim::run_circuit(tmpl.circuit, angles, params);
  std::vector<double> out(tmpl.readout_qubits.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const int q = tmpl.readout_qubits[k];
    const double ez = (mode.kind == EvalMode::Analytic)
                          ? qsim::expectation_z(state, q)
                          : qsim::estimate_expectation_z(
                                state, q, mode.shots,
                                mode.seed + static_cast<std::uint64_t>(k));
    out[k] = 0.5 * (1.0 + ez);
  }
  return out;
}

QnnJacobian qnn_jacobian(const PQCTemplate& tmpl,
                         std::span<const double> features,
                         std::span<const double> params) {
  if (params.size() != static_cast<std::size_t>(tmpl.n_params)) {
    throw ArityError("qnn_jacobian: param arity mismatch");
  }
  const std::size_t n_out = tmpl.readout_qubits.size();
  QnnJacobian jac;
  jac.d_params = Matrix(n_out, params.size());
  jac.d_features = Matrix(n_out, features.size());

  const EvalMode analytic = EvalMode::analytic();
  std::vector<double> shifted(params.begin(), params.end());
  for (std::size_t p = 0; p < params.size(); ++p) {
    shifted[p] = params[p] + kPi / 2.0;
    const auto plus = qnn_forward(tmpl, features, shifted, analytic);
    shifted[p] = params[p] - kPi / 2.0;
    const auto minus = qnn_forward(tmpl, features, shifted, analytic);
    shifted[p] = params[p];
    for (std::size_t k = 0; k < n_out; ++k) {
      jac.d_params(k, p) = 0.5 * (plus[k] - minus[k]);
    }
  }

  // Feature shifts act on the raw encoder angle pi*f; shifting that angle by
  // +/- pi/2 may push the feature argument outside [0,1], so the shifted
  // evaluation bypasses qnn_forward's range check by shifting angles directly.
  check_features(features);
  std::vector<double> angles(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) angles[i] = kPi * features[i];
  auto eval_raw = [&](std::span<const double> raw) {
    const qsim::Statevector state = qsim::run_circuit(tmpl.circuit, raw, params);
    std::vector<double> out(n_out);
    for (std::size_t k = 0; k < n_out; ++k) {
      out[k] = 0.5 * (1.0 + qsim::expectation_z(state, tmpl.readout_qubits[k]));
    }
    return out;
  };
  std::vector<double> shifted_angles = angles;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    shifted_angles[i] = angles[i] + kPi / 2.0;
    const auto plus = eval_raw(shifted_angles);
    shifted_angles[i] = angles[i] - kPi / 2.0;
    const auto minus = eval_raw(shifted_angles);
    shifted_angles[i] = angles[i];
    for (std::size_t k = 0; k < n_out; ++k) {
      jac.d_features(k, i) = kPi * 0.5 * (plus[k] - minus[k]);
    }
  }
  return jac;
}

std::string describe(AnsatzKind kind, int n_qubits, int n_readout) {
  const PQCTemplate t = build_pqc(kind, n_qubits, n_readout);
  std::ostringstream os;
  os << ansatz_name(kind) << " n_qubits=" << n_qubits
     << " n_readout=" << n_readout << " n_params=" << t.n_params << "\n";
  os << "gates:\n";
  for (std::size_t i = 0; i < t.circuit.gates.size(); ++i) {
    const auto& g = t.circuit.gates[i];
    os << "  " << i << ": ";
    if (g.kind == qsim::GateKind::RY) {
      os << "RY q" << g.q0 << " ";
      switch (g.angle.kind) {
        case qsim::AngleKind::Constant: os << "const(" << g.angle.value << ")"; break;
        case qsim::AngleKind::InputSlot: os << "input[" << g.angle.slot << "]"; break;
        case qsim::AngleKind::ParamSlot: os << "param[" << g.angle.slot << "]"; break;
      }
    } else {
      os << "CNOT q" << g.q0 << " -> q" << g.q1;
    }
    os << "\n";
  }
  os << "readout qubits:";
  for (int q : t.readout_qubits) os << " " << q;
  os << "\n";
  return os.str();
}

}  // namespace qtrack::circuits
