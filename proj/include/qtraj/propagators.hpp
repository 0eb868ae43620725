#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "qtraj/gaussian.hpp"
#include "qtraj/numerics.hpp"
#include "qtraj/potentials.hpp"

namespace qtraj {

struct ExactFreeKernel {};

/// Exact harmonic-oscillator propagator with its own mass and frequency.
struct MehlerKernel {
  double mass = 1.0;
  double omega = 1.0;
};

/// Semiclassical kernel from the exact action and the density of
/// trajectories; only quadratic potentials are supported.
struct VanVleckKernel {
  PotentialSpec potential;
};

/// Short-time kernel built from the averaged potential.
struct KernerSutcliffeKernel {
  AveragedPotential averaged;
};

struct KernelSpec {
  using Kind = std::variant<ExactFreeKernel, MehlerKernel, VanVleckKernel, KernerSutcliffeKernel>;
  Kind kind;
  SystemConfig cfg;

  KernelSpec(Kind k, SystemConfig c);
  std::string name() const;
};

/// Kernel value split into a smooth complex amplitude and a real phase so
/// that K = amplitude * exp(i phase); phase is S / hbar (unwrapped).
struct KernelParts {
  cplx amplitude;
  double phase;
  cplx value() const { return amplitude * std::polar(1.0, phase); }
};

KernelParts kernel_parts(const KernelSpec& spec, std::span<const double> x,
                         std::span<const double> x0, double t, double t0);
cplx kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> x0, double t,
            double t0);
cplx kernel(const KernelSpec& spec, double x, double x0, double t, double t0);

struct ApplyOptions {
  /// Effective support of psi0 is where |psi0| > threshold * max |psi0|.
  double support_threshold = 1e-12;
};

/// psi(x, t) = int K(x, x0, t, t0) psi0(x0) dx0 by the trapezoid rule.
///
/// The kernel phase must advance by less than pi between neighbouring grid
/// points for every pair (x, x0) inside the effective support; otherwise the
/// quadrature aliases and an Error naming the smallest admissible |t - t0|
/// for this grid is thrown.
ComplexField apply_kernel(const KernelSpec& spec, const ComplexField& psi0, double t, double t0,
                          const ApplyOptions& opts = {});

struct SliceOptions {
  ApplyOptions apply{};
  /// Largest tolerated relative norm change of a single slice.
  double max_norm_drift = 0.05;
};

struct SlicedEvolution {
  ComplexField psi;
  /// Relative norm change | ||psi_j+1|| - ||psi_j|| | / ||psi_j|| per slice.
  std::vector<double> slice_norm_drift;
};

/// Composes single-slice kernel applications over the subdivision of `window`.
SlicedEvolution time_slice_evolve(const KernelSpec& spec, const ComplexField& psi0,
                                  const TimeWindow& window, const SliceOptions& opts = {});

struct ReferenceOptions {
  /// Relative change allowed in the fourth-order energy functional before the
  /// grid is declared too coarse.
  double max_energy_drift = 1e-3;
  /// Largest probability fraction tolerated within `boundary_width` points of
  /// either wall; more means the walls are reflecting.
  double max_boundary_mass = 1e-8;
  std::size_t boundary_width = 8;
};

/// Crank-Nicolson evolution (one step per window subdivision) with a
/// second-order Laplacian and Dirichlet walls at both grid ends.
ComplexField reference_evolve(const PotentialSpec& spec, const ComplexField& psi0,
                              const TimeWindow& window, const SystemConfig& cfg,
                              const ReferenceOptions& opts = {});

/// Reference evolution that also returns the state after every step.
std::vector<ComplexField> reference_evolve_snapshots(const PotentialSpec& spec,
                                                     const ComplexField& psi0,
                                                     const TimeWindow& window,
                                                     const SystemConfig& cfg,
                                                     std::size_t substeps = 1,
                                                     const ReferenceOptions& opts = {});

/// Expectation of the energy with a fourth-order Laplacian (interior points).
double energy_expectation(const PotentialSpec& spec, const ComplexField& psi, const SystemConfig& cfg);

/// Fraction of the probability within `width` points of either grid end.
double boundary_mass_fraction(const ComplexField& psi, std::size_t width);

}  // namespace qtraj
