#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "qtraj/numerics.hpp"

using namespace qtraj;

TEST_CASE("grid spacing and validation") {
  const SpatialGrid g(-1.0, 1.0, 11);
  CHECK(g.dx() == doctest::Approx(0.2));
  CHECK(g.x(10) == doctest::Approx(1.0));
  CHECK(g.contains(0.3));
  CHECK_FALSE(g.contains(1.5));
  CHECK_THROWS_AS(SpatialGrid(-1.0, 1.0, 4), Error);
  CHECK_THROWS_AS(SpatialGrid(1.0, 1.0, 16), Error);
}

TEST_CASE("time window hits its end exactly") {
  const TimeWindow w(0.0, 0.3, 7);
  CHECK(w.time(0) == 0.0);
  CHECK(w.time(7) == 0.3);
  CHECK(w.step() == doctest::Approx(0.3 / 7));
  CHECK_THROWS_AS(TimeWindow(0.0, 1.0, 0), Error);
}

TEST_CASE("system config rejects bad constants") {
  CHECK_THROWS_AS(SystemConfig(0.0, {1.0}), Error);
  CHECK_THROWS_AS(SystemConfig(1.0, {}), Error);
  CHECK_THROWS_AS(SystemConfig(1.0, {1.0, -2.0}), Error);
  CHECK(SystemConfig::uniform(3, 2.0).dof() == 3);
}

TEST_CASE("trapezoid norm of a normalised Gaussian") {
  const SpatialGrid g(-10.0, 10.0, 801);
  const auto psi = ComplexField::sample(g, [](double x) {
    return cplx(std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x), 0.0);
  });
  CHECK(l2_norm(psi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l2_distance(psi, psi) == 0.0);
}

TEST_CASE("finite differences are second order including the ends") {
  auto max_error = [](std::size_t n, int order) {
    const SpatialGrid g(0.0, 1.0, n);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = std::sin(3.0 * g.x(i));
    const auto d = finite_difference<double>(f, g.dx(), order);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double exact = order == 1 ? 3.0 * std::cos(3.0 * g.x(i)) : -9.0 * std::sin(3.0 * g.x(i));
      e = std::max(e, std::abs(d[i] - exact));
    }
    return e;
  };
  for (int order : {1, 2}) {
    const double ratio = max_error(101, order) / max_error(201, order);
    CHECK(ratio > 3.5);
  }
  std::vector<double> few(5, 1.0);
  CHECK_THROWS_AS(finite_difference<double>(few, 0.1, 1), Error);
  std::vector<double> ok(10, 1.0);
  CHECK_THROWS_AS(finite_difference<double>(ok, 0.1, 3), Error);
}

TEST_CASE("order fit") {
  std::vector<ConvergenceSample> s{{0.1, 2e-2}, {0.05, 5e-3}, {0.025, 1.25e-3}};
  CHECK(fit_convergence_order(s) == doctest::Approx(2.0));
  s[1].error = 0.0;
  CHECK(fit_convergence_order(s) == std::numeric_limits<double>::infinity());
  s[1].error = -1.0;
  CHECK_THROWS_AS(fit_convergence_order(s), Error);
  s.pop_back();
  s[1].error = 1.0;
  CHECK_THROWS_AS(fit_convergence_order(s), Error);
}

TEST_CASE("Gauss-Legendre on the unit interval") {
  const auto rule = gauss_legendre_unit(8);
  double w = 0.0, m = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    w += rule.weights[i];
    m += rule.weights[i] * std::pow(rule.nodes[i], 15);
  }
  CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m == doctest::Approx(1.0 / 16.0).epsilon(1e-13));
}

TEST_CASE("tridiagonal solve") {
  const std::vector<cplx> lo{0.0, 1.0, cplx(0, 1)}, di{4.0, 4.0, 4.0}, up{1.0, cplx(2, 0), 0.0};
  const std::vector<cplx> x{1.0, cplx(0, 2), -1.0};
  std::vector<cplx> b{di[0] * x[0] + up[0] * x[1], lo[1] * x[0] + di[1] * x[1] + up[1] * x[2],
                      lo[2] * x[1] + di[2] * x[2]};
  solve_tridiagonal(lo, di, up, b);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(b[i] - x[i]) < 1e-14);
}

TEST_CASE("cubic interpolation reproduces quadratics") {
  const SpatialGrid g(-1.0, 1.0, 21);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = 2.0 * g.x(i) * g.x(i) - g.x(i) + 0.5;
  for (double x : {-1.0, -0.93, 0.01, 0.37, 0.999}) {
    CHECK(cubic_interpolate<double>(f, g.x_min(), g.dx(), x) == doctest::Approx(2 * x * x - x + 0.5).epsilon(1e-12));
  }
}
