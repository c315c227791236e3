#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "qtrack/errors.hpp"
#include "qtrack/qsim.hpp"
#include "qtrack/rng.hpp"

using namespace qtrack;
using namespace qtrack::qsim;
constexpr double pi = std::numbers::pi;

TEST_CASE("new_state is |0...0>") {
  auto s1 = new_state(1);
  CHECK(s1.amplitudes == std::vector<cplx>{1.0, 0.0});
  auto s2 = new_state(2);
  CHECK(s2.amplitudes == std::vector<cplx>{1.0, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(new_state(0), SizeError);
  CHECK_THROWS_AS(new_state(17), SizeError);
}

TEST_CASE("apply_ry basics") {
  auto s = new_state(1);
  apply_ry(s, 0, 0.0);
  CHECK(s.amplitudes[0].real() == doctest::Approx(1.0).epsilon(1e-14));

  s = new_state(1);
  apply_ry(s, 0, pi);
  CHECK(std::abs(s.amplitudes[0]) < 1e-12);
  CHECK(std::abs(s.amplitudes[1] - cplx(1.0)) < 1e-12);

  s = new_state(1);
  apply_ry(s, 0, pi / 2);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(s.amplitudes[0] - cplx(inv_sqrt2)) < 1e-12);
  CHECK(std::abs(s.amplitudes[1] - cplx(inv_sqrt2)) < 1e-12);

  CHECK_THROWS_AS(apply_ry(s, 1, 0.1), IndexError);
}

TEST_CASE("ry followed by inverse restores the state") {
  Rng rng(3);
  auto s = new_state(3);
  for (int i = 0; i < 5; ++i) apply_ry(s, i % 3, uniform(rng, -3.0, 3.0));
  const auto snapshot = s.amplitudes;
  const double theta = 1.234;
  apply_ry(s, 1, theta);
  apply_ry(s, 1, -theta);
  for (std::size_t i = 0; i < snapshot.size(); ++i)
    CHECK(std::abs(s.amplitudes[i] - snapshot[i]) < 1e-12);
}

TEST_CASE("apply_cnot truth table and involution") {
  auto s = new_state(2);
  apply_ry(s, 0, pi);  // |01> in little-endian = control qubit 0 set
  apply_cnot(s, 0, 1);
  CHECK(std::abs(s.amplitudes[3] - cplx(1.0)) < 1e-12);  // |11>

  s = new_state(2);
  apply_cnot(s, 0, 1);
  CHECK(s.amplitudes[0] == cplx(1.0));  // |00> untouched

  s = new_state(3);
  for (int i = 0; i < 3; ++i) apply_ry(s, i, 0.3 * (i + 1));
  const auto snapshot = s.amplitudes;
  apply_cnot(s, 0, 2);
  apply_cnot(s, 0, 2);
  CHECK(s.amplitudes == snapshot);

  CHECK_THROWS_AS(apply_cnot(s, 1, 1), IndexError);
  CHECK_THROWS_AS(apply_cnot(s, 0, 3), IndexError);
}

TEST_CASE("run_circuit composes gates and resolves slots") {
  Circuit c;
  c.n_qubits = 1;
  c.n_input_slots = 1;
  c.gates.push_back(GateOp::ry(0, AngleSource::input(0)));
  const double in[] = {pi / 2};
  auto s = run_circuit(c, in, {});
  CHECK(std::abs(s.amplitudes[0] - cplx(1.0 / std::sqrt(2.0))) < 1e-12);

  Circuit empty;
  empty.n_qubits = 2;
  auto s2 = run_circuit(empty, {}, {});
  CHECK(s2.amplitudes[0] == cplx(1.0));

  CHECK_THROWS_AS(run_circuit(c, {}, {}), ArityError);
}

TEST_CASE("circuit validation rejects bad slot coverage") {
  Circuit c;
  c.n_qubits = 2;
  c.n_param_slots = 2;
  c.gates.push_back(GateOp::ry(0, AngleSource::param(0)));
  CHECK_THROWS(c.validate());  // slot 1 never referenced
  c.gates.push_back(GateOp::ry(1, AngleSource::param(1)));
  CHECK_NOTHROW(c.validate());
}

namespace {

// Random circuit on up to max_qubits qubits and up to max_gates gates,
// mixing constant / input / param angle sources.
qsim::Circuit random_circuit(Rng& rng, int max_qubits, int max_gates,
                             std::vector<double>& inputs,
                             std::vector<double>& params) {
  Circuit c;
  c.n_qubits = 2 + static_cast<int>(uniform_index(rng, max_qubits - 1));
  const int n_gates = 1 + static_cast<int>(uniform_index(rng, max_gates));
  inputs.clear();
  params.clear();
  for (int g = 0; g < n_gates; ++g) {
    if (c.n_qubits >= 2 && uniform01(rng) < 0.3) {
      const int a = static_cast<int>(uniform_index(rng, c.n_qubits));
      int b = static_cast<int>(uniform_index(rng, c.n_qubits));
      if (b == a) b = (a + 1) % c.n_qubits;
      c.gates.push_back(GateOp::cnot(a, b));
    } else {
      const int q = static_cast<int>(uniform_index(rng, c.n_qubits));
      const double angle = uniform(rng, -pi, pi);
      const double pick = uniform01(rng);
      if (pick < 0.34) {
        c.gates.push_back(GateOp::ry(q, AngleSource::constant(angle)));
      } else if (pick < 0.67) {
        c.gates.push_back(GateOp::ry(q, AngleSource::input(c.n_input_slots)));
        inputs.push_back(angle);
        ++c.n_input_slots;
      } else {
        c.gates.push_back(GateOp::ry(q, AngleSource::param(c.n_param_slots)));
        params.push_back(angle);
        ++c.n_param_slots;
      }
    }
  }
  return c;
}

}  // namespace

TEST_CASE("random circuits match the dense matrix oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 120; ++trial) {
    std::vector<double> inputs, params;
    const Circuit c = random_circuit(rng, 3, 6, inputs, params);
    const auto state = run_circuit(c, inputs, params);
    const auto expected = oracles::run_dense(c.n_qubits, c.gates, inputs, params);
    REQUIRE(state.amplitudes.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(std::abs(state.amplitudes[i] - expected[i]) < 1e-10);
    }
    CHECK(std::abs(norm_squared(state) - 1.0) < 1e-12);
  }
}

TEST_CASE("expectation_z of a rotated qubit follows the cosine law") {
  auto at = [](double theta) {
    auto s = new_state(1);
    apply_ry(s, 0, theta);
    return expectation_z(s, 0);
  };
  CHECK(at(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(at(pi / 2)) < 1e-12);
  CHECK(at(pi / 3) == doctest::Approx(0.5).epsilon(1e-12));
  for (int k = 0; k < 100; ++k) {
    const double theta = pi * k / 99.0;
    CHECK(std::abs(at(theta) - std::cos(theta)) < 1e-12);
  }
  auto s = new_state(1);
  CHECK_THROWS_AS(expectation_z(s, 1), IndexError);
}

TEST_CASE("expectation_z reads the correct qubit of a product state") {
  auto s = new_state(2);
  apply_ry(s, 0, pi / 3);
  apply_ry(s, 1, 2 * pi / 3);
  CHECK(expectation_z(s, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(expectation_z(s, 1) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("shot estimates: determinism, exact limits, convergence") {
  auto s = new_state(1);
  CHECK(estimate_expectation_z(s, 0, 1000, 5) == 1.0);
  apply_ry(s, 0, pi);
  CHECK(estimate_expectation_z(s, 0, 1000, 5) == -1.0);

  auto h = new_state(1);
  apply_ry(h, 0, pi / 2);
  const double est = estimate_expectation_z(h, 0, 1000, 42);
  CHECK(est == estimate_expectation_z(h, 0, 1000, 42));
  CHECK(std::abs(est) < 0.16);  // 5 sigma at 1000 shots

  CHECK_THROWS_AS(estimate_expectation_z(h, 0, 0, 1), ArityError);

  // convergence at 1e4 shots: mean abs error over 100 random states < 0.02
  Rng rng(9);
  double total_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto st = new_state(1);
    apply_ry(st, 0, uniform(rng, 0.0, pi));
    total_err += std::abs(estimate_expectation_z(st, 0, 10000, 100 + i) -
                          expectation_z(st, 0));
  }
  CHECK(total_err / 100.0 < 0.02);
}
