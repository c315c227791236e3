#include "qtrack/qsim.hpp"

#include <cmath>
#include <string>

#include "qtrack/errors.hpp"
#include "qtrack/rng.hpp"

namespace qtrack::qsim {

void Circuit::validate() const {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw SizeError("circuit n_qubits out of range: " + std::to_string(n_qubits));
  }
  std::vector<bool> input_seen(static_cast<std::size_t>(n_input_slots), false);
  std::vector<bool> param_seen(static_cast<std::size_t>(n_param_slots), false);
  for (const GateOp& g : gates) {
    if (g.kind == GateKind::RY) {
      if (g.q0 < 0 || g.q0 >= n_qubits) {
        throw IndexError("RY qubit out of range");
      }
      if (g.angle.kind == AngleKind::InputSlot) {
        if (g.angle.slot < 0 || g.angle.slot >= n_input_slots) {
          throw IndexError("input slot out of range");
        }
        input_seen[static_cast<std::size_t>(g.angle.slot)] = true;
      } else if (g.angle.kind == AngleKind::ParamSlot) {
        if (g.angle.slot < 0 || g.angle.slot >= n_param_slots) {
          throw IndexError("param slot out of range");
        }
        param_seen[static_cast<std::size_t>(g.angle.slot)] = true;
      }
    } else {
      if (g.q0 < 0 || g.q0 >= n_qubits || g.q1 < 0 || g.q1 >= n_qubits) {
        throw IndexError("CNOT qubit out of range");
      }
      if (g.q0 == g.q1) {
        throw IndexError("CNOT control equals target");
      }
    }
  }
  for (std::size_t i = 0; i < input_seen.size(); ++i) {
    if (!input_seen[i]) {
      throw ConstructionError("input slot " + std::to_string(i) + " unreferenced");
    }
  }
  for (std::size_t i = 0; i < param_seen.size(); ++i) {
    if (!param_seen[i]) {
      throw ConstructionError("param slot " + std::to_string(i) + " unreferenced");
    }
  }
}

Statevector new_state(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw SizeError("n_qubits must be in [1, " + std::to_string(kMaxQubits) +
                    "], got " + std::to_string(n_qubits));
  }
  Statevector s;
  s.n_qubits = n_qubits;
  s.amplitudes.assign(std::size_t{1} << n_qubits, cplx(0.0, 0.0));
  s.amplitudes[0] = cplx(1.0, 0.0);
  return s;
}

void apply_ry(Statevector& state, int qubit, double angle) {
  if (qubit < 0 || qubit >= state.n_qubits) {
    throw IndexError("apply_ry: qubit " + std::to_string(qubit) + " out of range");
  }
  const double c = std::cos(angle * 0.5);
  const double s = std::sin(angle * 0.5);
  const std::size_t stride = std::size_t{1} << qubit;
  const std::size_t dim = state.dim();
  cplx* amp = state.amplitudes.data();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const cplx a0 = amp[i];
      const cplx a1 = amp[i + stride];
      amp[i] = c * a0 - s * a1;
      amp[i + stride] = s * a0 + c * a1;
    }
  }
}

void apply_cnot(Statevector& state, int control, int target) {
  if (control < 0 || control >= state.n_qubits || target < 0 ||
      target >= state.n_qubits) {
    throw IndexError("apply_cnot: qubit index out of range");
  }
  if (control == target) {
    throw IndexError("apply_cnot: control equals target");
  }
  const std::size_t cmask = std::size_t{1} << control;
  const std::size_t tmask = std::size_t{1} << target;
  const std::size_t dim = state.dim();
  cplx* amp = state.amplitudes.data();
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & cmask) && !(i & tmask)) {
      std::swap(amp[i], amp[i | tmask]);
    }
  }
}

Statevector run_circuit(const Circuit& circuit, std::span<const double> inputs,
                        std::span<const double> params) {
  if (inputs.size() != static_cast<std::size_t>(circuit.n_input_slots)) {
    throw ArityError("run_circuit: expected " +
                     std::to_string(circuit.n_input_slots) + " inputs, got " +
                     std::to_string(inputs.size()));
  }
  if (params.size() != static_cast<std::size_t>(circuit.n_param_slots)) {
    throw ArityError("run_circuit: expected " +
                     std::to_string(circuit.n_param_slots) + " params, got " +
                     std::to_string(params.size()));
  }
  Statevector state = new_state(circuit.n_qubits);
  for (const GateOp& g : circuit.gates) {
    if (g.kind == GateKind::RY) {
      double angle = 0.0;
      switch (g.angle.kind) {
        case AngleKind::Constant: angle = g.angle.value; break;
        case AngleKind::InputSlot: angle = inputs[static_cast<std::size_t>(g.angle.slot)]; break;
        case AngleKind::ParamSlot: angle = params[static_cast<std::size_t>(g.angle.slot)]; break;
      }
      apply_ry(state, g.q0, angle);
    } else {
      apply_cnot(state, g.q0, g.q1);
    }
  }
  return state;
}

double expectation_z(const Statevector& state, int qubit) {
  if (qubit < 0 || qubit >= state.n_qubits) {
    throw IndexError("expectation_z: qubit out of range");
  }
  const std::size_t mask = std::size_t{1} << qubit;
  double ez = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const double p = std::norm(state.amplitudes[i]);
    ez += (i & mask) ? -p : p;
  }
  return ez;
}

double estimate_expectation_z(const Statevector& state, int qubit, int shots,
                              std::uint64_t seed) {
  if (shots < 1) {
    throw ArityError("estimate_expectation_z: shots must be >= 1");
  }
  if (qubit < 0 || qubit >= state.n_qubits) {
    throw IndexError("estimate_expectation_z: qubit out of range");
  }
  const std::size_t mask = std::size_t{1} << qubit;
  double p_one = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if (i & mask) p_one += std::norm(state.amplitudes[i]);
  }
  Rng rng(seed);
  long n_one = 0;
  for (int s = 0; s < shots; ++s) {
    if (uniform01(rng) < p_one) ++n_one;
  }
  return 1.0 - 2.0 * static_cast<double>(n_one) / static_cast<double>(shots);
}

double norm_squared(const Statevector& state) {
  double n = 0.0;
  for (const cplx& a : state.amplitudes) n += std::norm(a);
  return n;
}

}  // namespace qtrack::qsim
