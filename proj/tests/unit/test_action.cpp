#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qtraj/action.hpp"

using namespace qtraj;

namespace {
const SystemConfig unit;
const auto harmonic = PotentialSpec::harmonic(1.0, 1.0);
}  // namespace

TEST_CASE("short-time and exact harmonic actions") {
  const AveragedPotential avg(harmonic);
  CHECK(short_time_action(avg, 1.0, 0.0, 0.1, 0.0, unit).value == doctest::Approx(4.9833333).epsilon(1e-7));
  // cos(0.1) / (2 sin(0.1)); the two values differ by dt^3 / 90 + O(dt^5).
  CHECK(exact_action(harmonic, 1.0, 0.0, 0.1, unit).value == doctest::Approx(4.9833222116).epsilon(1e-10));
  CHECK(exact_action(PotentialSpec::free(), 3.0, 1.0, 2.0, unit).value == doctest::Approx(1.0));
}

TEST_CASE("truncated action error is third order in dt") {
  const AveragedPotential avg(harmonic);
  std::vector<ConvergenceSample> err;
  for (double dt : {0.2, 0.1, 0.05, 0.025}) {
    err.push_back({dt, std::abs(exact_action(harmonic, 1.0, 0.0, dt, unit).value -
                                short_time_action(avg, 1.0, 0.0, dt, 0.0, unit).value)});
  }
  CHECK(fit_convergence_order(err) >= 2.0);
}

TEST_CASE("closed-form partials agree with finite differences") {
  const std::vector<double> x{0.7}, x0{-0.2};
  const double t = 0.8, h = 1e-6;
  const auto p = exact_action_partials(harmonic, x, x0, t, unit);
  auto S = [&](double xx, double xx0, double tt) { return exact_action(harmonic, xx, xx0, tt, unit).value; };
  CHECK(p.dS_dx[0] == doctest::Approx((S(0.7 + h, -0.2, t) - S(0.7 - h, -0.2, t)) / (2 * h)).epsilon(1e-7));
  CHECK(p.dS_dx0[0] == doctest::Approx((S(0.7, -0.2 + h, t) - S(0.7, -0.2 - h, t)) / (2 * h)).epsilon(1e-7));
  CHECK(p.dS_dt == doctest::Approx((S(0.7, -0.2, t + h) - S(0.7, -0.2, t - h)) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("exact action refuses a caustic") {
  CHECK_THROWS_AS(exact_action(harmonic, 1.0, 0.0, std::numbers::pi, unit), Error);
}

TEST_CASE("shooting reproduces the closed form and stays away from caustics") {
  const std::vector<double> x{1.0}, x0{0.0};
  const auto r = action_by_shooting(harmonic, x, x0, 0.5, 0.0, unit);
  CHECK(r.action == doctest::Approx(exact_action(harmonic, 1.0, 0.0, 0.5, unit).value).epsilon(1e-7));
  CHECK(r.initial_momentum[0] == doctest::Approx(1.0 / std::sin(0.5)).epsilon(1e-8));
  CHECK_THROWS_AS(action_by_shooting(harmonic, x, x0, 2.0, 0.0, unit), Error);
}

TEST_CASE("quartic short-time action converges to the shooting action") {
  const auto q = PotentialSpec::quartic(0.25);
  const AveragedPotential avg(q);
  const std::vector<double> x{0.8}, x0{0.2};
  std::vector<ConvergenceSample> err;
  for (double dt : {0.2, 0.1, 0.05}) {
    const double ref = action_by_shooting(q, x, x0, dt, 0.0, unit).action;
    err.push_back({dt, std::abs(ref - short_time_action(avg, x, x0, dt, 0.0, unit).value)});
  }
  CHECK(fit_convergence_order(err) >= 2.0);
}
