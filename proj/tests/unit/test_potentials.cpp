#include <doctest.h>

#include <cmath>
#include <vector>

#include "qtraj/potentials.hpp"

using namespace qtraj;

TEST_CASE("pointwise values") {
  const auto h = PotentialSpec::harmonic(2.0, 3.0);
  CHECK(eval_potential(h, 1.5) == doctest::Approx(0.5 * 2 * 9 * 2.25));
  CHECK(grad_potential(h, 1.5) == doctest::Approx(2 * 9 * 1.5));
  const auto q = PotentialSpec::quartic(0.5, 2);
  const std::vector<double> x{1.0, 2.0};
  CHECK(eval_potential(q, x) == doctest::Approx(0.5 * (1 + 16)));
  CHECK(grad_potential(q, x)[1] == doctest::Approx(16.0));
  CHECK(curvature_potential(q, x)[1] == doctest::Approx(24.0));
  CHECK(eval_potential(PotentialSpec::free(), 3.0) == 0.0);
}

TEST_CASE("tabulated potential interpolates and refuses the outside") {
  const SpatialGrid g(-2.0, 2.0, 41);
  std::vector<double> s(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) s[i] = g.x(i) * g.x(i);
  const auto t = PotentialSpec::tabulated(g, s);
  CHECK(eval_potential(t, 0.73) == doctest::Approx(0.73 * 0.73).epsilon(1e-12));
  CHECK(grad_potential(t, 0.73) == doctest::Approx(1.46).epsilon(1e-10));
  CHECK_THROWS_AS(eval_potential(t, 2.5), Error);
  CHECK_THROWS_AS(PotentialSpec::tabulated(g, std::vector<double>(5, 0.0)), Error);
}

TEST_CASE("segment average of the harmonic potential") {
  const AveragedPotential avg(PotentialSpec::harmonic(1.0, 1.0));
  CHECK(averaged_potential(avg, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(averaged_potential(avg, 1.0, -1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("averaged potential coincides with V on the diagonal and halves its gradient") {
  const auto q = PotentialSpec::quartic(0.3);
  const AveragedPotential avg(q);
  for (double x : {-1.7, 0.0, 0.4, 2.2}) {
    CHECK(averaged_potential(avg, x, x) == doctest::Approx(eval_potential(q, x)).epsilon(1e-13));
    CHECK(averaged_potential_gradient(avg, x, x) == doctest::Approx(0.5 * grad_potential(q, x)).epsilon(1e-13));
  }
}

TEST_CASE("quadrature order is bounded below") {
  CHECK_THROWS_AS(AveragedPotential(PotentialSpec::free(), 4), Error);
}
