#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qtraj/numerics.hpp"

namespace qtraj {

struct FreePotential {};

/// V(x) = sum_j mass omega^2 x_j^2 / 2.
struct HarmonicPotential {
  double mass = 1.0;
  double omega = 1.0;
};

/// V(x) = sum_j coefficient x_j^4.
struct QuarticPotential {
  double coefficient = 1.0;
};

/// One-dimensional samples interpolated with a C1 cubic.
struct TabulatedPotential {
  SpatialGrid grid;
  std::vector<double> samples;
};

/// A classical potential on R^n. Free, harmonic and quartic act separably on
/// every coordinate; tabulated potentials are one-dimensional.
class PotentialSpec {
 public:
  using Variant = std::variant<FreePotential, HarmonicPotential, QuarticPotential, TabulatedPotential>;

  static PotentialSpec free(std::size_t dimension = 1);
  static PotentialSpec harmonic(double mass, double omega, std::size_t dimension = 1);
  static PotentialSpec quartic(double coefficient, std::size_t dimension = 1);
  static PotentialSpec tabulated(SpatialGrid grid, std::vector<double> samples);

  const Variant& variant() const noexcept { return variant_; }
  std::size_t dimension() const noexcept { return dimension_; }
  bool is_quadratic() const noexcept {
    return std::holds_alternative<FreePotential>(variant_) ||
           std::holds_alternative<HarmonicPotential>(variant_);
  }
  std::string name() const;

 private:
  PotentialSpec(Variant v, std::size_t dimension);
  Variant variant_;
  std::size_t dimension_;
};

double eval_potential(const PotentialSpec& spec, std::span<const double> x);
double eval_potential(const PotentialSpec& spec, double x);

std::vector<double> grad_potential(const PotentialSpec& spec, std::span<const double> x);
double grad_potential(const PotentialSpec& spec, double x);

/// Second derivative d^2V/dx_j^2 (diagonal of the Hessian).
std::vector<double> curvature_potential(const PotentialSpec& spec, std::span<const double> x);

/// Average of a potential over the straight segment [x0, x], evaluated with a
/// Gauss-Legendre rule in the segment parameter.
class AveragedPotential {
 public:
  static constexpr std::size_t kDefaultNodes = 16;
  static constexpr std::size_t kMinNodes = 8;

  explicit AveragedPotential(PotentialSpec base, std::size_t quadrature_nodes = kDefaultNodes);

  const PotentialSpec& base() const noexcept { return base_; }
  std::size_t quadrature_nodes() const noexcept { return rule_.nodes.size(); }
  const QuadratureRule& rule() const noexcept { return rule_; }

 private:
  PotentialSpec base_;
  QuadratureRule rule_;
};

/// int_0^1 V(tau x + (1 - tau) x0) dtau.
double averaged_potential(const AveragedPotential& avg, std::span<const double> x,
                          std::span<const double> x0);
double averaged_potential(const AveragedPotential& avg, double x, double x0);

/// Gradient of the averaged potential with respect to the endpoint x:
/// int_0^1 tau grad V(tau x + (1 - tau) x0) dtau.
std::vector<double> averaged_potential_gradient(const AveragedPotential& avg,
                                                std::span<const double> x,
                                                std::span<const double> x0);
double averaged_potential_gradient(const AveragedPotential& avg, double x, double x0);

}  // namespace qtraj
