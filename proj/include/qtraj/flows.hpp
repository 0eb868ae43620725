#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtraj/gaussian.hpp"
#include "qtraj/numerics.hpp"
#include "qtraj/potentials.hpp"

namespace qtraj {

struct PhaseSpacePoint {
  std::vector<double> x;
  std::vector<double> p;

  std::size_t dof() const noexcept { return x.size(); }
  /// Max-norm distance over all coordinates.
  double distance(const PhaseSpacePoint& other) const;
};

/// Q(x, t) and its gradient, defined for t in [t_min, t_max].
struct QuantumTerm {
  std::function<double(std::span<const double>, double)> value;
  std::function<std::vector<double>(std::span<const double>, double)> gradient;
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
};

/// H = sum p^2 / 2m + V(x), optionally augmented by a quantum term.
struct HamiltonianSpec {
  PotentialSpec potential;
  SystemConfig cfg;
  std::optional<QuantumTerm> quantum;

  HamiltonianSpec(PotentialSpec v, SystemConfig c, std::optional<QuantumTerm> q = std::nullopt);
  double energy(const PhaseSpacePoint& z, double t = 0.0) const;
  /// Hamiltonian vector field (dH/dp, -dH/dx) at time t.
  PhaseSpacePoint field(const PhaseSpacePoint& z, double t) const;
};

enum class Integrator { StormerVerlet, RK4 };

/// Integrated trajectory with cubic Hermite dense output.
class FlowMap {
 public:
  FlowMap(Integrator kind, std::vector<double> times, std::vector<PhaseSpacePoint> states,
          std::vector<PhaseSpacePoint> rates);

  Integrator kind() const noexcept { return kind_; }
  std::size_t steps() const noexcept { return times_.size() - 1; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<PhaseSpacePoint>& states() const noexcept { return states_; }
  const PhaseSpacePoint& end() const { return states_.back(); }
  PhaseSpacePoint at(double t) const;

 private:
  Integrator kind_;
  std::vector<double> times_;
  std::vector<PhaseSpacePoint> states_;
  std::vector<PhaseSpacePoint> rates_;
};

struct FlowOptions {
  /// Integration aborts once any coordinate exceeds this magnitude.
  double blowup = 1e12;
};

/// Stormer-Verlet with window.steps() steps; H must not carry a quantum term.
FlowMap classical_flow(const HamiltonianSpec& H, const PhaseSpacePoint& z0, const TimeWindow& window,
                       const FlowOptions& opts = {});

/// RK4 on the full (possibly time-dependent) Hamiltonian field.
FlowMap quantum_flow(const HamiltonianSpec& H, const PhaseSpacePoint& z0, const TimeWindow& window,
                     const FlowOptions& opts = {});

/// Point of extended phase space (z, t).
struct ExtendedPoint {
  PhaseSpacePoint z;
  double t;
};

/// Autonomous flow of (X_H(z, t), 1) for the given duration (RK4).
ExtendedPoint suspended_flow(const HamiltonianSpec& H, const ExtendedPoint& start, double duration,
                             std::size_t steps);

using VectorField = std::function<PhaseSpacePoint(const PhaseSpacePoint&, double)>;

/// Two-parameter family k_{t,t0} approximating the flow of `field`.
struct AlgorithmFamily {
  std::string name;
  int order = 1;
  std::function<PhaseSpacePoint(const PhaseSpacePoint&, double t, double t0)> map;
  VectorField field;
};

/// x += (p0 / m) dt, p -= grad V(x0) dt.
AlgorithmFamily euler_step_algorithm(const HamiltonianSpec& H);

/// Classical flow used as its own algorithm (Stormer-Verlet, step <= max_step).
AlgorithmFamily exact_flow_algorithm(const HamiltonianSpec& H, double max_step = 1e-3);

inline constexpr double kAlgorithmGateTolerance = 1e-5;

/// Scaled distance between the central-difference derivative of k_{t,t0}(z)
/// at t = t0 and the generating field.
double algorithm_derivative_gap(const AlgorithmFamily& alg, const PhaseSpacePoint& z, double t0,
                                double h = 1e-4);

/// Throws when the derivative gap exceeds `tol`.
void check_algorithm(const AlgorithmFamily& alg, const PhaseSpacePoint& z, double t0,
                     double tol = kAlgorithmGateTolerance);

/// k_{t,t_{N-1}} o ... o k_{t_1,t_0}(z0) over the equal subdivision; the
/// derivative gate runs at (z0, t0) first.
PhaseSpacePoint trotter_compose(const AlgorithmFamily& alg, const PhaseSpacePoint& z0,
                                const TimeWindow& window, double gate_tol = kAlgorithmGateTolerance);

using PhaseMap = std::function<PhaseSpacePoint(const PhaseSpacePoint&)>;

/// max |J^T Omega J - Omega| for the central-difference Jacobian J of `map`
/// at z0 (step 1e-5 (1 + |z_k|)).
double symplectic_check(const PhaseMap& map, const PhaseSpacePoint& z0);

enum class GaussianQMode { Thawed, Frozen };

/// Quantum potential of `g0` (prepared at t0): thawed follows the exact
/// Gaussian evolution under `spec`, frozen keeps the t0 form.
QuantumTerm gaussian_quantum_term(const GaussianParams& g0, const PotentialSpec& spec, double t0,
                                  const SystemConfig& cfg, GaussianQMode mode);

}  // namespace qtraj
