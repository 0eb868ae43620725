#pragma once

// Grids, sampled fields, quadrature, finite differences and convergence-order
// fitting shared by every other module. All arithmetic is double precision.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "qtraj/error.hpp"

namespace qtraj {

using cplx = std::complex<double>;

/// Physical constants of the system: hbar, one mass per degree of freedom.
struct SystemConfig {
  double hbar = 1.0;
  std::vector<double> masses{1.0};

  SystemConfig() = default;
  SystemConfig(double hbar_, std::vector<double> masses_);

  /// n degrees of freedom, all with mass `m`.
  static SystemConfig uniform(std::size_t dof, double m = 1.0, double hbar = 1.0);

  std::size_t dof() const noexcept { return masses.size(); }
  double mass(std::size_t j) const { return masses.at(j); }
  void validate() const;
};

/// Uniform 1-D grid including both endpoints.
class SpatialGrid {
 public:
  static constexpr std::size_t kMinPoints = 8;

  SpatialGrid(double x_min, double x_max, std::size_t points);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t size() const noexcept { return points_; }
  double dx() const noexcept { return dx_; }
  double length() const noexcept { return x_max_ - x_min_; }
  double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }
  std::vector<double> coordinates() const;
  bool contains(double x) const noexcept { return x >= x_min_ && x <= x_max_; }

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t points_;
  double dx_;
};

/// Equal subdivision t_j = t0 + j (t - t0) / N of a time interval.
class TimeWindow {
 public:
  TimeWindow(double t0, double t, std::size_t steps);

  double t0() const noexcept { return t0_; }
  double t() const noexcept { return t_; }
  std::size_t steps() const noexcept { return steps_; }
  double duration() const noexcept { return t_ - t0_; }
  double step() const noexcept { return (t_ - t0_) / static_cast<double>(steps_); }
  double time(std::size_t j) const noexcept {
    return j == steps_ ? t_ : t0_ + static_cast<double>(j) * step();
  }

 private:
  double t0_;
  double t_;
  std::size_t steps_;
};

/// Complex wavefunction samples on a SpatialGrid.
struct ComplexField {
  SpatialGrid grid;
  std::vector<cplx> values;

  ComplexField(SpatialGrid g, std::vector<cplx> v);
  /// Samples f(x) on every grid point.
  template <typename F>
  static ComplexField sample(const SpatialGrid& g, F&& f) {
    std::vector<cplx> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.x(i));
    return ComplexField(g, std::move(v));
  }

  std::size_t size() const noexcept { return values.size(); }
  const cplx& operator[](std::size_t i) const { return values[i]; }
};

/// Composite trapezoid rule over the whole grid.
cplx trapezoid_integrate(const ComplexField& field);
double trapezoid_integrate(std::span<const double> values, double dx);

/// L2 norm sqrt(int |psi|^2 dx) by the trapezoid rule.
double l2_norm(const ComplexField& field);
/// L2 norm of a - b; the grids must match.
double l2_distance(const ComplexField& a, const ComplexField& b);

/// Number of outermost points on each side where derivative stencils are
/// one-sided; diagnostics built on derivatives skip them.
inline constexpr std::size_t kBoundaryStencilWidth = 2;

/// Central differences inside, one-sided second-order at the two ends.
template <typename T>
std::vector<T> finite_difference(std::span<const T> f, double dx, int order) {
  const std::size_t n = f.size();
  if (order != 1 && order != 2) {
    throw Error("numerics", "finite_difference", "order must be 1 or 2");
  }
  if (n < SpatialGrid::kMinPoints) {
    throw Error("numerics", "finite_difference", "need at least 8 samples");
  }
  std::vector<T> d(n);
  if (order == 1) {
    const double s = 1.0 / (2.0 * dx);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * s;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) * s;
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * s;
  } else {
    const double s = 1.0 / (dx * dx);
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * s;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * s;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * s;
  }
  return d;
}

ComplexField finite_difference(const ComplexField& field, int order);

/// One (step, error) observation of a convergence study.
struct ConvergenceSample {
  double h;
  double error;
};

/// Least-squares slope of log(error) against log(h).
///
/// Returns +infinity when any error is exactly zero (exact agreement).
/// Throws on fewer than three samples, non-positive steps, or negative or
/// non-finite errors.
double fit_convergence_order(std::span<const ConvergenceSample> samples);

/// Gauss-Legendre nodes and weights mapped onto [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre_unit(std::size_t n);

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[i]` couples
/// row i to i-1 and `upper[i]` row i to i+1; lower[0] and upper[n-1] unused.
void solve_tridiagonal(std::span<const cplx> lower, std::span<const cplx> diag,
                       std::span<const cplx> upper, std::span<cplx> rhs);

/// C1 cubic (Catmull-Rom) interpolation of uniform samples. Reproduces
/// quadratics exactly; end slopes use one-sided second-order differences.
template <typename T>
T cubic_interpolate(std::span<const T> f, double x_min, double dx, double x) {
  const std::size_t n = f.size();
  const double s = (x - x_min) / dx;
  std::size_t i = s <= 0.0 ? 0 : static_cast<std::size_t>(s);
  if (i >= n - 1) i = n - 2;
  const double u = s - static_cast<double>(i);
  auto slope = [&](std::size_t k) -> T {
    if (k == 0) return 0.5 * (-3.0 * f[0] + 4.0 * f[1] - f[2]);
    if (k == n - 1) return 0.5 * (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]);
    return 0.5 * (f[k + 1] - f[k - 1]);
  };
  const T m0 = slope(i);
  const T m1 = slope(i + 1);
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * f[i] + (u3 - 2 * u2 + u) * m0 +
         (-2 * u3 + 3 * u2) * f[i + 1] + (u3 - u2) * m1;
}

bool all_finite(std::span<const cplx> v);
bool all_finite(std::span<const double> v);

}  // namespace qtraj
