// Independent reference implementations used only by tests. These are
// deliberately written the slow, obvious way (dense matrices, exhaustive
// pair counting) so they share no code with the library under test.
#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qtrack/qsim.hpp"

namespace oracles {

using cplx = std::complex<double>;
using CMat = std::vector<std::vector<cplx>>;

inline CMat identity(std::size_t dim) {
  CMat m(dim, std::vector<cplx>(dim, 0.0));
  for (std::size_t i = 0; i < dim; ++i) m[i][i] = 1.0;
  return m;
}

inline CMat matmul(const CMat& a, const CMat& b) {
  const std::size_t n = a.size();
  CMat c(n, std::vector<cplx>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Full 2^n x 2^n unitary of a single RY on `qubit` (little-endian index
// convention: qubit 0 is the least significant bit). Built entry by entry
// from the tensor-product definition rather than by any stride trick.
inline CMat ry_matrix(int n_qubits, int qubit, double angle) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  CMat m(dim, std::vector<cplx>(dim, 0.0));
  for (std::size_t row = 0; row < dim; ++row) {
    for (std::size_t col = 0; col < dim; ++col) {
      if ((row | (std::size_t{1} << qubit)) != (col | (std::size_t{1} << qubit)))
        continue;  // differ outside the target qubit
      const bool rb = (row >> qubit) & 1, cb = (col >> qubit) & 1;
      if (!rb && !cb) m[row][col] = c;
      else if (!rb && cb) m[row][col] = -s;
      else if (rb && !cb) m[row][col] = s;
      else m[row][col] = c;
    }
  }
  return m;
}

inline CMat cnot_matrix(int n_qubits, int control, int target) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  CMat m(dim, std::vector<cplx>(dim, 0.0));
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t row = col;
    if ((col >> control) & 1) row = col ^ (std::size_t{1} << target);
    m[row][col] = 1.0;
  }
  return m;
}

// Dense-matrix evaluation of a circuit on |0...0>, with the slot angles
// already resolved by the caller.
inline std::vector<cplx> run_dense(int n_qubits,
                                   const std::vector<qtrack::qsim::GateOp>& gates,
                                   std::span<const double> inputs,
                                   std::span<const double> params) {
  using namespace qtrack::qsim;
  CMat u = identity(std::size_t{1} << n_qubits);
  for (const GateOp& g : gates) {
    CMat gate;
    if (g.kind == GateKind::CNOT) {
      gate = cnot_matrix(n_qubits, g.q0, g.q1);
    } else {
      double angle = g.angle.value;
      if (g.angle.kind == AngleKind::InputSlot) angle = inputs[g.angle.slot];
      if (g.angle.kind == AngleKind::ParamSlot) angle = params[g.angle.slot];
      gate = ry_matrix(n_qubits, g.q0, angle);
    }
    u = matmul(gate, u);
  }
  std::vector<cplx> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i][0];
  return out;
}

// Exhaustive Mann-Whitney pair statistic: fraction of (positive, negative)
// pairs ranked correctly, ties counted one half.
inline double pairwise_auc(std::span<const double> scores,
                           std::span<const int> labels) {
  double wins = 0.0;
  long long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

}  // namespace oracles
