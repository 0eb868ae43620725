#include "qtraj/potentials.hpp"

#include <cmath>

namespace qtraj {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void domain_error(const char* op, const std::string& what) {
  throw Error("potentials", op, what);
}

double tabulated_value(const TabulatedPotential& t, double x, const char* op) {
  if (!t.grid.contains(x)) domain_error(op, "position outside the tabulated domain");
  return cubic_interpolate<double>(t.samples, t.grid.x_min(), t.grid.dx(), x);
}

double tabulated_slope(const TabulatedPotential& t, double x, const char* op) {
  if (!t.grid.contains(x)) domain_error(op, "position outside the tabulated domain");
  const double h = 1e-5 * std::max(1.0, std::abs(x));
  const double lo = std::max(t.grid.x_min(), x - h);
  const double hi = std::min(t.grid.x_max(), x + h);
  return (tabulated_value(t, hi, op) - tabulated_value(t, lo, op)) / (hi - lo);
}

double coordinate_value(const PotentialSpec::Variant& v, double x, const char* op) {
  return std::visit(
      overloaded{
          [](const FreePotential&) { return 0.0; },
          [x](const HarmonicPotential& h) { return 0.5 * h.mass * h.omega * h.omega * x * x; },
          [x](const QuarticPotential& q) { return q.coefficient * x * x * x * x; },
          [x, op](const TabulatedPotential& t) { return tabulated_value(t, x, op); },
      },
      v);
}

double coordinate_slope(const PotentialSpec::Variant& v, double x, const char* op) {
  return std::visit(
      overloaded{
          [](const FreePotential&) { return 0.0; },
          [x](const HarmonicPotential& h) { return h.mass * h.omega * h.omega * x; },
          [x](const QuarticPotential& q) { return 4.0 * q.coefficient * x * x * x; },
          [x, op](const TabulatedPotential& t) { return tabulated_slope(t, x, op); },
      },
      v);
}

double coordinate_curvature(const PotentialSpec::Variant& v, double x, const char* op) {
  return std::visit(
      overloaded{
          [](const FreePotential&) { return 0.0; },
          [](const HarmonicPotential& h) { return h.mass * h.omega * h.omega; },
          [x](const QuarticPotential& q) { return 12.0 * q.coefficient * x * x; },
          [x, op](const TabulatedPotential& t) {
            const double h = 0.25 * t.grid.dx();
            const double lo = std::max(t.grid.x_min(), x - h);
            const double hi = std::min(t.grid.x_max(), x + h);
            return (tabulated_slope(t, hi, op) - tabulated_slope(t, lo, op)) / (hi - lo);
          },
      },
      v);
}

void check_dimension(const PotentialSpec& spec, std::size_t n, const char* op) {
  if (n != spec.dimension()) {
    domain_error(op, "position has " + std::to_string(n) + " components, potential expects " +
                         std::to_string(spec.dimension()));
  }
}

double finite_or_throw(double v, const char* op) {
  if (!std::isfinite(v)) domain_error(op, "non-finite potential value");
  return v;
}

}  // namespace

PotentialSpec::PotentialSpec(Variant v, std::size_t dimension)
    : variant_(std::move(v)), dimension_(dimension) {
  if (dimension_ < 1) throw Error("potentials", "PotentialSpec", "dimension must be >= 1");
}

PotentialSpec PotentialSpec::free(std::size_t dimension) {
  return PotentialSpec(FreePotential{}, dimension);
}

PotentialSpec PotentialSpec::harmonic(double mass, double omega, std::size_t dimension) {
  if (!(mass > 0.0) || !(omega > 0.0) || !std::isfinite(mass) || !std::isfinite(omega)) {
    throw Error("potentials", "PotentialSpec", "harmonic requires mass > 0 and omega > 0");
  }
  return PotentialSpec(HarmonicPotential{mass, omega}, dimension);
}

PotentialSpec PotentialSpec::quartic(double coefficient, std::size_t dimension) {
  if (!std::isfinite(coefficient)) {
    throw Error("potentials", "PotentialSpec", "quartic coefficient must be finite");
  }
  return PotentialSpec(QuarticPotential{coefficient}, dimension);
}

PotentialSpec PotentialSpec::tabulated(SpatialGrid grid, std::vector<double> samples) {
  if (samples.size() != grid.size()) {
    throw Error("potentials", "PotentialSpec", "tabulated sample count must equal grid size");
  }
  if (!all_finite(samples)) {
    throw Error("potentials", "PotentialSpec", "tabulated samples must be finite");
  }
  return PotentialSpec(TabulatedPotential{std::move(grid), std::move(samples)}, 1);
}

std::string PotentialSpec::name() const {
  return std::visit(overloaded{
                        [](const FreePotential&) { return std::string("free"); },
                        [](const HarmonicPotential&) { return std::string("harmonic"); },
                        [](const QuarticPotential&) { return std::string("quartic"); },
                        [](const TabulatedPotential&) { return std::string("tabulated"); },
                    },
                    variant_);
}

double eval_potential(const PotentialSpec& spec, std::span<const double> x) {
  check_dimension(spec, x.size(), "eval_potential");
  double v = 0.0;
  for (double xj : x) v += coordinate_value(spec.variant(), xj, "eval_potential");
  return finite_or_throw(v, "eval_potential");
}

double eval_potential(const PotentialSpec& spec, double x) {
  return eval_potential(spec, std::span<const double>(&x, 1));
}

std::vector<double> grad_potential(const PotentialSpec& spec, std::span<const double> x) {
  check_dimension(spec, x.size(), "grad_potential");
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    g[j] = finite_or_throw(coordinate_slope(spec.variant(), x[j], "grad_potential"), "grad_potential");
  }
  return g;
}

double grad_potential(const PotentialSpec& spec, double x) {
  return grad_potential(spec, std::span<const double>(&x, 1))[0];
}

std::vector<double> curvature_potential(const PotentialSpec& spec, std::span<const double> x) {
  check_dimension(spec, x.size(), "curvature_potential");
  std::vector<double> c(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    c[j] = finite_or_throw(coordinate_curvature(spec.variant(), x[j], "curvature_potential"),
                           "curvature_potential");
  }
  return c;
}

AveragedPotential::AveragedPotential(PotentialSpec base, std::size_t quadrature_nodes)
    : base_(std::move(base)) {
  if (quadrature_nodes < kMinNodes) {
    throw Error("potentials", "AveragedPotential", "quadrature_nodes must be >= 8");
  }
  rule_ = gauss_legendre_unit(quadrature_nodes);
}

double averaged_potential(const AveragedPotential& avg, std::span<const double> x,
                          std::span<const double> x0) {
  const auto& spec = avg.base();
  check_dimension(spec, x.size(), "averaged_potential");
  check_dimension(spec, x0.size(), "averaged_potential");
  const auto& rule = avg.rule();
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double tau = rule.nodes[k];
    double v = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      v += coordinate_value(spec.variant(), tau * x[j] + (1.0 - tau) * x0[j], "averaged_potential");
    }
    sum += rule.weights[k] * v;
  }
  return finite_or_throw(sum, "averaged_potential");
}

double averaged_potential(const AveragedPotential& avg, double x, double x0) {
  return averaged_potential(avg, std::span<const double>(&x, 1), std::span<const double>(&x0, 1));
}

std::vector<double> averaged_potential_gradient(const AveragedPotential& avg,
                                                std::span<const double> x,
                                                std::span<const double> x0) {
  const auto& spec = avg.base();
  check_dimension(spec, x.size(), "averaged_potential_gradient");
  check_dimension(spec, x0.size(), "averaged_potential_gradient");
  const auto& rule = avg.rule();
  std::vector<double> g(x.size(), 0.0);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double tau = rule.nodes[k];
    for (std::size_t j = 0; j < x.size(); ++j) {
      g[j] += rule.weights[k] * tau *
              coordinate_slope(spec.variant(), tau * x[j] + (1.0 - tau) * x0[j],
                               "averaged_potential_gradient");
    }
  }
  for (double& gj : g) finite_or_throw(gj, "averaged_potential_gradient");
  return g;
}

double averaged_potential_gradient(const AveragedPotential& avg, double x, double x0) {
  return averaged_potential_gradient(avg, std::span<const double>(&x, 1),
                                     std::span<const double>(&x0, 1))[0];
}

}  // namespace qtraj
