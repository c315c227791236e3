#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace qtrack::qsim {

using cplx = std::complex<double>;

inline constexpr int kMaxQubits = 16;

// Dense statevector, little-endian qubit order: qubit 0 is the least
// significant bit of the amplitude index.
struct Statevector {
  int n_qubits = 0;
  std::vector<cplx> amplitudes;

  std::size_t dim() const { return amplitudes.size(); }
};

enum class GateKind { RY, CNOT };

enum class AngleKind { Constant, InputSlot, ParamSlot };

struct AngleSource {
  AngleKind kind = AngleKind::Constant;
  double value = 0.0;  // Constant only
  int slot = -1;       // InputSlot / ParamSlot only

  static AngleSource constant(double v) { return {AngleKind::Constant, v, -1}; }
  static AngleSource input(int slot) { return {AngleKind::InputSlot, 0.0, slot}; }
  static AngleSource param(int slot) { return {AngleKind::ParamSlot, 0.0, slot}; }

  bool operator==(const AngleSource&) const = default;
};

struct GateOp {
  GateKind kind = GateKind::RY;
  int q0 = -1;  // RY target, or CNOT control
  int q1 = -1;  // CNOT target
  AngleSource angle;  // RY only

  static GateOp ry(int qubit, AngleSource a) { return {GateKind::RY, qubit, -1, a}; }
  static GateOp cnot(int control, int target) {
    return {GateKind::CNOT, control, target, AngleSource::constant(0.0)};
  }

  bool operator==(const GateOp&) const = default;
};

struct Circuit {
  int n_qubits = 0;
  std::vector<GateOp> gates;
  int n_input_slots = 0;
  int n_param_slots = 0;

  // Checks qubit bounds, CNOT distinctness, and that every declared slot is
  // referenced by at least one gate. Throws on violation.
  void validate() const;
};

Statevector new_state(int n_qubits);

void apply_ry(Statevector& state, int qubit, double angle);
void apply_cnot(Statevector& state, int control, int target);

// Applies the circuit's gates in order to |0...0>, resolving InputSlot and
// ParamSlot angles from the supplied vectors (raw radians, no rescaling).
Statevector run_circuit(const Circuit& circuit, std::span<const double> inputs,
                        std::span<const double> params);

// Exact <Z> on one qubit.
double expectation_z(const Statevector& state, int qubit);

// Shot-based <Z>: mean of `shots` sampled +/-1 outcomes. Deterministic for a
// fixed seed (see rng.hpp for the generator contract).
double estimate_expectation_z(const Statevector& state, int qubit, int shots,
                              std::uint64_t seed);

double norm_squared(const Statevector& state);

}  // namespace qtrack::qsim
