#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qtrack/matrix.hpp"
#include "qtrack/qsim.hpp"

namespace qtrack::circuits {

enum class AnsatzKind { MPS, TTN, MERA };

std::string ansatz_name(AnsatzKind kind);
AnsatzKind ansatz_from_name(const std::string& name);

// Evaluation mode for QNN readout: exact expectations, or the 1000-shot
// averaging protocol (opt-in; gradients require analytic mode).
struct EvalMode {
  enum Kind { Analytic, Shots } kind = Analytic;
  int shots = 1000;
  std::uint64_t seed = 0;

  static EvalMode analytic() { return {Analytic, 0, 0}; }
  static EvalMode sampled(int shots, std::uint64_t seed) {
    return {Shots, shots, seed};
  }
};

// An encode+ansatz circuit: one RY(pi * feature[i]) encoder per qubit,
// followed by the parametrized gates, with designated readout qubits.
struct PQCTemplate {
  AnsatzKind kind = AnsatzKind::MPS;
  int n_qubits = 0;
  qsim::Circuit circuit;
  std::vector<int> readout_qubits;
  int n_params = 0;
};

// RY(pi * f) encoders, one per qubit. Features must be pre-scaled to [0,1]
// so the encoder angles stay in [0,pi] where cos is injective.
std::vector<qsim::GateOp> encoder_gates(int n_qubits);

// Throws RangeError if any feature falls outside [0,1].
void check_features(std::span<const double> features);

PQCTemplate build_pqc(AnsatzKind kind, int n_qubits, int n_readout);

// Parameter count of the construction; trees depend on the readout width.
int param_count(AnsatzKind kind, int n_qubits, int n_readout = 1);

// QNN forward pass: encode, run, read out (1 + <Z>)/2 per readout qubit.
std::vector<double> qnn_forward(const PQCTemplate& tmpl,
                                std::span<const double> features,
                                std::span<const double> params,
                                const EvalMode& mode);

// Parameter-shift Jacobians (analytic mode only). d_params is
// n_readout x n_params, d_features is n_readout x n_qubits; feature entries
// carry the chain factor pi from the [0,1] -> [0,pi] encoding map.
struct QnnJacobian {
  Matrix d_params;
  Matrix d_features;
};

QnnJacobian qnn_jacobian(const PQCTemplate& tmpl,
                         std::span<const double> features,
                         std::span<const double> params);

// Human-readable circuit listing: gate order, slot numbering, readouts,
// parameter count. Consumed by the CLI `describe` subcommand.
std::string describe(AnsatzKind kind, int n_qubits, int n_readout = 1);

}  // namespace qtrack::circuits
