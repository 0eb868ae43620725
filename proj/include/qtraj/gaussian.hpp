#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qtraj/numerics.hpp"
#include "qtraj/potentials.hpp"

namespace qtraj {

/// Separable Gaussian wavepacket
///
///   psi(x) = exp( sum_j [ -alpha_j (x_j - a_j)^2 + i p_j (x_j - a_j) / hbar ] + c )
///
/// with complex width parameters alpha_j (Re alpha_j > 0), real centre a_j,
/// real momentum p_j and a complex log-prefactor c = log|A| + i gamma.
struct GaussianParams {
  std::vector<double> center;
  std::vector<cplx> width;
  std::vector<double> momentum;
  cplx log_prefactor{0.0, 0.0};

  /// Unit-norm packet whose density has standard deviation sigma_j per axis.
  static GaussianParams normalized(std::vector<double> center, std::vector<double> sigma,
                                   std::vector<double> momentum);
  static GaussianParams normalized(double center, double sigma, double momentum = 0.0);

  std::size_t dof() const noexcept { return center.size(); }
  /// Standard deviation of the position density along axis j.
  double sigma(std::size_t j) const;
  double norm() const;
  double global_phase() const noexcept { return log_prefactor.imag(); }
  void validate(const char* op) const;

  cplx value(std::span<const double> x, double hbar) const;
  cplx value(double x, double hbar) const;
};

ComplexField sample_gaussian(const GaussianParams& g, const SpatialGrid& grid, double hbar);

/// Exact (thawed Gaussian) evolution under a free or harmonic Hamiltonian
/// over [t0, t]. Gaussians stay Gaussian and the centre follows the
/// classical trajectory.
GaussianParams gaussian_exact_evolve(const GaussianParams& g, const PotentialSpec& spec, double t,
                                     double t0, const SystemConfig& cfg);

/// Gaussian obtained by applying the short-time kernel built from the
/// averaged potential to `g` (free or harmonic only; the integral over x0 is
/// a Gaussian integral done in closed form).
GaussianParams gaussian_ks_closed_form(const GaussianParams& g, const PotentialSpec& spec, double t,
                                       double t0, const SystemConfig& cfg);

/// Quantum potential of a Gaussian: sum_j (hbar^2 Re alpha_j / m_j)(1 - 2 Re alpha_j y_j^2).
double gaussian_quantum_potential(const GaussianParams& g, std::span<const double> x,
                                  const SystemConfig& cfg);
std::vector<double> gaussian_quantum_force(const GaussianParams& g, std::span<const double> x,
                                           const SystemConfig& cfg);
/// Guidance velocity (p_j - 2 hbar Im alpha_j y_j) / m_j.
std::vector<double> gaussian_velocity(const GaussianParams& g, std::span<const double> x,
                                      const SystemConfig& cfg);

}  // namespace qtraj
