#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qtraj/flows.hpp"

using namespace qtraj;

namespace {
const SystemConfig unit;
const auto harmonic = PotentialSpec::harmonic(1.0, 1.0);
}  // namespace

TEST_CASE("classical flows") {
  const HamiltonianSpec H(harmonic, unit);
  const auto quarter = classical_flow(H, {{1.0}, {0.0}}, TimeWindow(0.0, std::numbers::pi / 2, 2000)).end();
  CHECK(std::abs(quarter.x[0]) < 1e-6);
  CHECK(std::abs(quarter.p[0] + 1.0) < 1e-6);

  const HamiltonianSpec free(PotentialSpec::free(), unit);
  const auto z = classical_flow(free, {{0.0}, {1.0}}, TimeWindow(0.0, 2.0, 7)).end();
  CHECK(z.x[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(z.p[0] == 1.0);

  const PhaseSpacePoint z0{{0.3}, {-1.1}};
  const auto long_run = classical_flow(H, z0, TimeWindow(0.0, 100.0, 100000)).end();
  CHECK(std::abs(H.energy(long_run) - H.energy(z0)) < 1e-6);
}

TEST_CASE("groupoid law") {
  const HamiltonianSpec H(PotentialSpec::quartic(0.2), unit);
  const PhaseSpacePoint z0{{0.8}, {0.4}};
  const auto mid = classical_flow(H, z0, TimeWindow(0.0, 1.0, 100)).end();
  const auto two_legs = classical_flow(H, mid, TimeWindow(1.0, 2.0, 100)).end();
  const auto one_leg = classical_flow(H, z0, TimeWindow(0.0, 2.0, 200)).end();
  CHECK(two_legs.distance(one_leg) < 1e-8);
}

TEST_CASE("dense output interpolates between steps") {
  const HamiltonianSpec H(harmonic, unit);
  const auto f = classical_flow(H, {{1.0}, {0.0}}, TimeWindow(0.0, 1.0, 200));
  CHECK(f.at(0.0).distance(f.states().front()) == 0.0);
  const auto mid = f.at(0.5025);
  CHECK(std::abs(mid.x[0] - std::cos(0.5025)) < 1e-6);
}

TEST_CASE("quantum flow without a quantum term is the classical flow") {
  const HamiltonianSpec H(harmonic, unit);
  const TimeWindow w(0.0, 1.0, 400);
  const PhaseSpacePoint z0{{0.4}, {0.9}};
  CHECK(quantum_flow(H, z0, w).end().distance(classical_flow(H, z0, w).end()) < 1e-6);
}

TEST_CASE("thawed Gaussian Q reproduces the Bohm trajectory of a spreading packet") {
  const auto G = GaussianParams::normalized(0.0, 1.0);
  const auto V = PotentialSpec::free();
  const HamiltonianSpec H(V, unit, gaussian_quantum_term(G, V, 0.0, unit, GaussianQMode::Thawed));
  const auto z = quantum_flow(H, {{1.0}, {0.0}}, TimeWindow(0.0, 2.0, 400)).end();
  CHECK(z.x[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("suspended flow matches the time-dependent flow") {
  const auto G = GaussianParams::normalized(0.3, 0.6, 0.2);
  const HamiltonianSpec H(harmonic, unit, gaussian_quantum_term(G, harmonic, 0.0, unit, GaussianQMode::Thawed));
  const PhaseSpacePoint z0{{0.5}, {0.1}};
  const auto e = suspended_flow(H, {z0, 0.0}, 0.7, 140);
  CHECK(e.t == doctest::Approx(0.7));
  CHECK(e.z.distance(quantum_flow(H, z0, TimeWindow(0.0, 0.7, 140)).end()) < 1e-12);
}

TEST_CASE("Euler-step algorithm") {
  const HamiltonianSpec H(harmonic, unit);
  const auto alg = euler_step_algorithm(H);
  const auto z = alg.map({{1.0}, {0.0}}, 0.1, 0.0);
  CHECK(z.x[0] == doctest::Approx(1.0));
  CHECK(z.p[0] == doctest::Approx(-0.1));
  CHECK(alg.map({{1.0}, {0.0}}, 0.0, 0.0).distance({{1.0}, {0.0}}) == 0.0);
  CHECK(algorithm_derivative_gap(alg, {{0.4}, {-0.2}}, 0.0) < 1e-8);
}

TEST_CASE("Trotter composition of Euler steps converges at first order") {
  const HamiltonianSpec H(harmonic, unit);
  std::vector<ConvergenceSample> err;
  for (std::size_t n : {16u, 64u, 256u, 1024u}) {
    const auto z = trotter_compose(euler_step_algorithm(H), {{1.0}, {0.0}}, TimeWindow(0.0, std::numbers::pi / 2, n));
    err.push_back({1.0 / static_cast<double>(n), std::hypot(z.x[0], z.p[0] + 1.0)});
  }
  CHECK(err.back().error < 2e-3);
  CHECK(fit_convergence_order(err) >= 0.9);
}

TEST_CASE("composing the exact flow does not depend on the subdivision") {
  const HamiltonianSpec H(harmonic, unit);
  const auto alg = exact_flow_algorithm(H);
  const auto a = trotter_compose(alg, {{1.0}, {0.0}}, TimeWindow(0.0, 1.0, 4));
  const auto b = trotter_compose(alg, {{1.0}, {0.0}}, TimeWindow(0.0, 1.0, 10));
  CHECK(a.distance(b) < 1e-6);
}

TEST_CASE("the derivative gate rejects an inconsistent family") {
  const HamiltonianSpec H(harmonic, unit);
  auto bad = euler_step_algorithm(H);
  bad.map = [](const PhaseSpacePoint& z, double t, double t0) {
    return PhaseSpacePoint{{z.x[0] + 2.0 * z.p[0] * (t - t0)}, {z.p[0] - z.x[0] * (t - t0)}};
  };
  CHECK_THROWS_AS(check_algorithm(bad, {{0.5}, {1.0}}, 0.0), Error);
  CHECK_THROWS_AS(trotter_compose(bad, {{0.5}, {1.0}}, TimeWindow(0.0, 1.0, 8)), Error);
}

TEST_CASE("symplectic checks") {
  const PhaseSpacePoint z0{{0.5}, {0.2}};
  CHECK(symplectic_check([](const PhaseSpacePoint& z) { return z; }, z0) < 1e-12);
  const HamiltonianSpec H(harmonic, unit);
  CHECK(symplectic_check([&](const PhaseSpacePoint& z) { return classical_flow(H, z, TimeWindow(0.0, 1.0, 1000)).end(); },
                         z0) < 1e-6);
  const auto G = GaussianParams::normalized(0.0, 0.7, 0.4);
  const HamiltonianSpec Q(harmonic, unit, gaussian_quantum_term(G, harmonic, 0.0, unit, GaussianQMode::Thawed));
  CHECK(symplectic_check([&](const PhaseSpacePoint& z) { return quantum_flow(Q, z, TimeWindow(0.0, 0.5, 500)).end(); },
                         z0) < 1e-4);
  // A shear that stretches x without touching p is not symplectic.
  CHECK(symplectic_check([](const PhaseSpacePoint& z) { return PhaseSpacePoint{{2.0 * z.x[0]}, {z.p[0]}}; }, z0) > 0.5);
}

TEST_CASE("short-time gap between quantum and classical flows is second order") {
  const auto G = GaussianParams::normalized(0.5, 0.5, 1.0);
  const HamiltonianSpec classical(harmonic, unit);
  const HamiltonianSpec quantum(harmonic, unit, gaussian_quantum_term(G, harmonic, 0.0, unit, GaussianQMode::Frozen));
  const PhaseSpacePoint z0{{0.5}, {1.0}};
  std::vector<ConvergenceSample> gap;
  for (double dt : {0.1, 0.05, 0.025}) {
    const TimeWindow w(0.0, dt, 100);
    gap.push_back({dt, quantum_flow(quantum, z0, w).end().distance(classical_flow(classical, z0, w).end())});
  }
  CHECK(fit_convergence_order(gap) >= 1.9);
}

TEST_CASE("quantum term outside its time range is refused") {
  const auto G = GaussianParams::normalized(0.0, 1.0);
  auto q = gaussian_quantum_term(G, harmonic, 0.0, unit, GaussianQMode::Thawed);
  q.t_max = 1.0;
  const HamiltonianSpec H(harmonic, unit, q);
  CHECK_THROWS_AS(H.field({{0.0}, {0.0}}, 2.0), Error);
  CHECK_THROWS_AS(classical_flow(H, {{0.0}, {0.0}}, TimeWindow(0.0, 0.5, 10)), Error);
}
