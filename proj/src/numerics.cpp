#include "qtraj/numerics.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace qtraj {

SystemConfig::SystemConfig(double hbar_, std::vector<double> masses_)
    : hbar(hbar_), masses(std::move(masses_)) {
  validate();
}

SystemConfig SystemConfig::uniform(std::size_t dof, double m, double hbar) {
  return SystemConfig(hbar, std::vector<double>(dof, m));
}

void SystemConfig::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) {
    throw Error("numerics", "SystemConfig", "hbar must be finite and > 0");
  }
  if (masses.empty()) {
    throw Error("numerics", "SystemConfig", "dof must be >= 1");
  }
  for (double m : masses) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw Error("numerics", "SystemConfig", "every mass must be finite and > 0");
    }
  }
}

SpatialGrid::SpatialGrid(double x_min, double x_max, std::size_t points)
    : x_min_(x_min), x_max_(x_max), points_(points) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw Error("numerics", "SpatialGrid", "need finite x_max > x_min");
  }
  if (points < kMinPoints) {
    throw Error("numerics", "SpatialGrid", "points must be >= 8");
  }
  dx_ = (x_max - x_min) / static_cast<double>(points - 1);
}

std::vector<double> SpatialGrid::coordinates() const {
  std::vector<double> xs(points_);
  for (std::size_t i = 0; i < points_; ++i) xs[i] = x(i);
  return xs;
}

TimeWindow::TimeWindow(double t0, double t, std::size_t steps) : t0_(t0), t_(t), steps_(steps) {
  if (!std::isfinite(t0) || !std::isfinite(t)) {
    throw Error("numerics", "TimeWindow", "times must be finite");
  }
  if (steps < 1) throw Error("numerics", "TimeWindow", "steps must be >= 1");
  if (t == t0) throw Error("numerics", "TimeWindow", "t must differ from t0");
}

ComplexField::ComplexField(SpatialGrid g, std::vector<cplx> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw Error("numerics", "ComplexField", "sample count must equal grid size");
  }
  if (!all_finite(values)) {
    throw Error("numerics", "ComplexField", "samples must be finite");
  }
}

bool all_finite(std::span<const cplx> v) {
  return std::all_of(v.begin(), v.end(), [](const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double z) { return std::isfinite(z); });
}

cplx trapezoid_integrate(const ComplexField& field) {
  const auto& v = field.values;
  if (!all_finite(v)) throw Error("numerics", "trapezoid_integrate", "non-finite input");
  cplx sum = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) sum += v[i];
  return sum * field.grid.dx();
}

double trapezoid_integrate(std::span<const double> v, double dx) {
  if (v.size() < 2) throw Error("numerics", "trapezoid_integrate", "need >= 2 samples");
  if (!all_finite(v)) throw Error("numerics", "trapezoid_integrate", "non-finite input");
  double sum = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) sum += v[i];
  return sum * dx;
}

double l2_norm(const ComplexField& field) {
  std::vector<double> rho(field.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(field.values[i]);
  return std::sqrt(trapezoid_integrate(rho, field.grid.dx()));
}

double l2_distance(const ComplexField& a, const ComplexField& b) {
  if (!(a.grid == b.grid)) throw Error("numerics", "l2_distance", "grids differ");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(a.values[i] - b.values[i]);
  return std::sqrt(trapezoid_integrate(d, a.grid.dx()));
}

ComplexField finite_difference(const ComplexField& field, int order) {
  auto d = finite_difference<cplx>(std::span<const cplx>(field.values), field.grid.dx(), order);
  return ComplexField(field.grid, std::move(d));
}

double fit_convergence_order(std::span<const ConvergenceSample> samples) {
  if (samples.size() < 3) {
    throw Error("numerics", "fit_convergence_order", "need at least 3 samples");
  }
  for (const auto& s : samples) {
    if (!(s.h > 0.0) || !std::isfinite(s.h)) {
      throw Error("numerics", "fit_convergence_order", "steps must be finite and > 0");
    }
    if (!std::isfinite(s.error) || s.error < 0.0) {
      throw Error("numerics", "fit_convergence_order", "errors must be finite and >= 0");
    }
  }
  for (const auto& s : samples) {
    if (s.error == 0.0) return std::numeric_limits<double>::infinity();
  }
  const double n = static_cast<double>(samples.size());
  double mx = 0.0, my = 0.0;
  for (const auto& s : samples) {
    mx += std::log(s.h);
    my += std::log(s.error);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& s : samples) {
    const double dx = std::log(s.h) - mx;
    sxy += dx * (std::log(s.error) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) {
    throw Error("numerics", "fit_convergence_order", "steps must not all be equal");
  }
  return sxy / sxx;
}

QuadratureRule gauss_legendre_unit(std::size_t n) {
  if (n < 1) throw Error("numerics", "gauss_legendre_unit", "need >= 1 node");
  QuadratureRule rule{std::vector<double>(n), std::vector<double>(n)};
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (std::size_t k = 2; k <= n; ++k) {
        const double dk = static_cast<double>(k);
        const double p2 = ((2.0 * dk - 1.0) * z * p1 - (dk - 1.0) * p0) / dk;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = dn * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    if (n == 1) {
      z = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = 0.5 * (1.0 - z);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + z);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

void solve_tridiagonal(std::span<const cplx> lower, std::span<const cplx> diag,
                       std::span<const cplx> upper, std::span<cplx> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n || n == 0) {
    throw Error("numerics", "solve_tridiagonal", "size mismatch");
  }
  std::vector<cplx> c(n);
  cplx denom = diag[0];
  c[0] = upper[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i] * c[i - 1];
    c[i] = i + 1 < n ? upper[i] / denom : cplx{};
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

}  // namespace qtraj
