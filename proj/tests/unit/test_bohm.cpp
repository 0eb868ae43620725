#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qtraj/bohm.hpp"
#include "qtraj/gaussian.hpp"
#include "qtraj/propagators.hpp"

using namespace qtraj;

namespace {
const SystemConfig unit;

Evolution analytic_evolution(const GaussianParams& g, const PotentialSpec& V, const SpatialGrid& grid, double t,
                             std::size_t count) {
  Evolution ev;
  for (std::size_t k = 0; k <= count; ++k) {
    const double tk = t * static_cast<double>(k) / static_cast<double>(count);
    ev.times.push_back(tk);
    ev.fields.push_back(sample_gaussian(k == 0 ? g : gaussian_exact_evolve(g, V, tk, 0.0, unit), grid, 1.0));
  }
  return ev;
}
}  // namespace

TEST_CASE("polar decomposition of a plane-wave packet") {
  const SpatialGrid g(-10.0, 10.0, 1001);
  const auto psi = sample_gaussian(GaussianParams::normalized(0.0, 2.0, 2.0), g, 1.0);
  const auto f = polar_decompose(psi, unit);
  CHECK(reconstruction_error(f, psi, unit) < 1e-10);
  const std::size_t i = 500, j = 700;
  CHECK(f.S[j] - f.S[i] == doctest::Approx(2.0 * (g.x(j) - g.x(i))).epsilon(1e-10));
}

TEST_CASE("node of the first excited state") {
  const SpatialGrid g(-6.0, 6.0, 1201);
  const auto psi = ComplexField::sample(g, [](double x) { return cplx(x * std::exp(-0.5 * x * x), 0.0); });
  const auto f = polar_decompose(psi, unit);
  CHECK(f.node_mask[600]);
  const std::size_t left = 599, right = 601;
  CHECK(std::abs(std::abs(f.S[right] - f.S[left]) - std::numbers::pi) < 1e-9);
  const auto q = quantum_potential(f, unit);
  bool masked_near_node = false;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (std::abs(g.x(k)) < 0.01 && !q.valid_mask[k]) masked_near_node = true;
  }
  CHECK(masked_near_node);
}

TEST_CASE("quantum potential of a Gaussian") {
  const SpatialGrid g(-10.0, 10.0, 2001);
  const auto G = GaussianParams::normalized(0.5, 1.0, 0.3);
  const auto q = quantum_potential(polar_decompose(sample_gaussian(G, g, 1.0), unit), unit);
  CHECK(quantum_potential_form_gap(q) < 1e-6);
  for (std::size_t k : {1050u, 1191u, 900u}) {
    const double x = g.x(k);
    CHECK(q.Q[k] == doctest::Approx(gaussian_quantum_potential(G, std::vector<double>{x}, unit)).epsilon(1e-6));
  }
}

TEST_CASE("velocity field") {
  const SpatialGrid g(-10.0, 10.0, 2001);
  const auto plane = sample_gaussian(GaussianParams::normalized(0.0, 3.0, 2.0), g, 1.0);
  CHECK(velocity_field(plane, unit).v[1000] == doctest::Approx(2.0).epsilon(1e-7));
  const auto G = gaussian_exact_evolve(GaussianParams::normalized(0.0, 1.0), PotentialSpec::free(), 1.0, 0.0, unit);
  const auto v = velocity_field(sample_gaussian(G, g, 1.0), unit);
  for (std::size_t k : {1100u, 1300u, 800u}) {
    CHECK(v.v[k] == doctest::Approx(gaussian_velocity(G, std::vector<double>{g.x(k)}, unit)[0]).epsilon(1e-7));
  }
}

TEST_CASE("continuity residual") {
  const auto harmonic = PotentialSpec::harmonic(1.0, 1.0);
  const SpatialGrid g(-8.0, 8.0, 1024);
  const auto ground = sample_gaussian(GaussianParams::normalized(0.0, std::sqrt(0.5)), g, 1.0);
  const double dt = 0.5 * g.dx();
  const auto next = reference_evolve(harmonic, ground, TimeWindow(0.0, dt, 1), unit);
  CHECK(continuity_residual(ground, next, dt, unit).relative < 1e-3);

  std::vector<ConvergenceSample> r;
  for (std::size_t n : {256u, 512u, 1024u}) {
    const SpatialGrid gn(-8.0, 8.0, n);
    const auto a = sample_gaussian(GaussianParams::normalized(0.5, 0.8, 0.7), gn, 1.0);
    const double h = 0.5 * gn.dx();
    const auto b = reference_evolve(harmonic, a, TimeWindow(0.0, h, 1), unit);
    r.push_back({gn.dx(), continuity_residual(a, b, h, unit).relative});
  }
  CHECK(r.back().error < 1e-3);
  CHECK(fit_convergence_order(r) >= 1.5);
}

TEST_CASE("free spreading trajectory") {
  const SpatialGrid g(-10.0, 10.0, 1024);
  const auto ev = analytic_evolution(GaussianParams::normalized(0.0, 1.0), PotentialSpec::free(), g, 2.0, 200);
  const auto traj = integrate_bohm_trajectory(ev, 1.0, unit);
  CHECK(traj.termination == Termination::Completed);
  CHECK(traj.samples.back().t == doctest::Approx(2.0));
  // sigma(t) = sqrt(1 + (t / 2)^2) for sigma0 = 1, so x(2) = sqrt 2.
  CHECK(std::abs(traj.samples.back().x - std::sqrt(2.0)) < 1e-3);
}

TEST_CASE("stationary state keeps its particles still") {
  const auto harmonic = PotentialSpec::harmonic(1.0, 1.0);
  const SpatialGrid g(-8.0, 8.0, 801);
  const auto ev = analytic_evolution(GaussianParams::normalized(0.0, std::sqrt(0.5)), harmonic, g, 1.0, 40);
  const auto traj = integrate_bohm_trajectory(ev, 0.7, unit);
  for (const auto& s : traj.samples) CHECK(std::abs(s.x - 0.7) < 1e-8);
  const auto drift = quantum_potential_drift(traj);
  CHECK(drift.samples.back().error < 1e-8);
}

TEST_CASE("quantum potential drift is second order for a spreading packet") {
  const SpatialGrid g(-10.0, 10.0, 2001);
  const auto ev = analytic_evolution(GaussianParams::normalized(0.0, 1.0), PotentialSpec::free(), g, 0.2, 80);
  const auto traj = integrate_bohm_trajectory(ev, 1.0, unit);
  const std::vector<double> dts{0.2, 0.1, 0.05};
  CHECK(quantum_potential_drift(traj, dts).order >= 1.9);
}

TEST_CASE("trajectories leave through the boundary and refuse nodes") {
  const SpatialGrid g(-5.0, 5.0, 501);
  const auto ev = analytic_evolution(GaussianParams::normalized(3.0, 1.0, 4.0), PotentialSpec::free(), g, 1.0, 100);
  CHECK(integrate_bohm_trajectory(ev, 4.0, unit).termination == Termination::Boundary);
  CHECK(to_string(Termination::Boundary) == "boundary");

  Evolution nodal;
  const auto psi = ComplexField::sample(g, [](double x) { return cplx(x * std::exp(-0.5 * x * x), 0.0); });
  nodal.times = {0.0, 0.1, 0.2};
  nodal.fields = {psi, psi, psi};
  CHECK_THROWS_AS(integrate_bohm_trajectory(nodal, 0.0, unit), Error);
}

TEST_CASE("an ensemble transports the density") {
  // Jacobian-density law: rho(x(t), t) dx(t) = rho0(x0) dx0 for neighbouring particles.
  const SpatialGrid g(-10.0, 10.0, 1024);
  const auto G = GaussianParams::normalized(0.0, 1.0, 0.5);
  const auto ev = analytic_evolution(G, PotentialSpec::free(), g, 1.0, 100);
  const auto Gt = gaussian_exact_evolve(G, PotentialSpec::free(), 1.0, 0.0, unit);
  const double d = 1e-3;
  for (double x0 : {-1.0, 0.3, 1.2}) {
    const double a = integrate_bohm_trajectory(ev, x0, unit).samples.back().x;
    const double b = integrate_bohm_trajectory(ev, x0 + d, unit).samples.back().x;
    const double rho0 = std::norm(G.value(x0 + 0.5 * d, 1.0));
    const double rho1 = std::norm(Gt.value(0.5 * (a + b), 1.0));
    CHECK(rho1 * (b - a) == doctest::Approx(rho0 * d).epsilon(1e-4));
  }
}
