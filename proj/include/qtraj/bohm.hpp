#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qtraj/numerics.hpp"

namespace qtraj {

inline constexpr double kDefaultNodeThreshold = 1e-6;

/// psi = sqrt(rho) exp(i S / hbar) on a 1-D grid.
struct PolarFields {
  SpatialGrid grid;
  std::vector<double> rho;
  /// Phase times hbar, unwrapped outward from the density maximum.
  std::vector<double> S;
  /// True where rho < eps_node * max rho.
  std::vector<bool> node_mask;
};

PolarFields polar_decompose(const ComplexField& psi, const SystemConfig& cfg,
                            double eps_node = kDefaultNodeThreshold);

/// Off-mask (max |sqrt(rho) e^{iS/hbar} - psi|) / max |psi|.
double reconstruction_error(const PolarFields& fields, const ComplexField& psi, const SystemConfig& cfg);

struct QuantumPotentialField {
  SpatialGrid grid;
  /// -(hbar^2 / 2m) (sqrt rho)'' / sqrt rho.
  std::vector<double> Q;
  /// Same quantity from rho: -(hbar^2 / 4m) [rho'' / rho - (rho' / rho)^2 / 2].
  std::vector<double> Q_from_rho;
  /// False on nodes, their stencil neighbours and the two outermost points.
  std::vector<bool> valid_mask;
};

/// Both forms use five-point (fourth-order) stencils.
QuantumPotentialField quantum_potential(const PolarFields& fields, const SystemConfig& cfg);

/// max |Q - Q_from_rho| / max |Q| over valid points (absolute when Q vanishes).
double quantum_potential_form_gap(const QuantumPotentialField& q);

struct VelocityField {
  SpatialGrid grid;
  std::vector<double> v;
  std::vector<bool> valid_mask;
};

/// v = (hbar / m) Im(psi' / psi) with a five-point derivative.
VelocityField velocity_field(const ComplexField& psi, const SystemConfig& cfg,
                             double eps_node = kDefaultNodeThreshold);

struct ContinuityResidual {
  /// d rho / dt + d(rho v)/dx at interior points (zero elsewhere).
  std::vector<double> residual;
  /// max |residual| / max(max |d rho/dt|, max |d j/dx|, hbar max rho / (m L^2)).
  double relative;
};

ContinuityResidual continuity_residual(const ComplexField& psi_t0, const ComplexField& psi_t1, double dt,
                                       const SystemConfig& cfg);

/// Uniformly spaced wavefunction snapshots on one grid.
struct Evolution {
  std::vector<double> times;
  std::vector<ComplexField> fields;
};

struct BohmSample {
  double t;
  double x;
  double p;
  double Q;
};

enum class Termination { Completed, Node, Boundary };
std::string to_string(Termination t);

struct BohmTrajectory {
  std::vector<BohmSample> samples;
  Termination termination = Termination::Completed;
};

/// RK4 on dx/dt = v(x, t). One RK4 step spans two snapshot intervals so the
/// midpoint stages fall on snapshots; between snapshots v is interpolated
/// linearly in time and with a C1 cubic in space. Samples are recorded at
/// the start and after every step.
BohmTrajectory integrate_bohm_trajectory(const Evolution& evolution, double x0, const SystemConfig& cfg,
                                         double eps_node = kDefaultNodeThreshold);

struct QuantumPotentialDrift {
  std::vector<ConvergenceSample> samples;
  double order;
};

/// |Q(x(t), t) - Q(x0, t0)| against t - t0 at the requested offsets (every
/// recorded sample when `dts` is empty). Drifts at or below 1e-12 |Q0| count
/// as exact.
QuantumPotentialDrift quantum_potential_drift(const BohmTrajectory& traj, std::span<const double> dts = {});

}  // namespace qtraj
