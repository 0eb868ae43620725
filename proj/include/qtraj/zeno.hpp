#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qtraj/flows.hpp"
#include "qtraj/gaussian.hpp"
#include "qtraj/numerics.hpp"
#include "qtraj/potentials.hpp"

namespace qtraj {

enum class MeasurementMode { WavefunctionLevel, FlowLevel };

/// Momentum attached to the re-prepared packet: the Bohm momentum grad S
/// just before the observation.
enum class MomentumRule { BohmMomentum };

struct MeasurementSchedule {
  std::size_t N = 1;
  double sigma_meas = 0.5;
  MeasurementMode mode = MeasurementMode::FlowLevel;
  MomentumRule momentum_rule = MomentumRule::BohmMomentum;
  /// Flow level only. Frozen keeps Q^j at its form at t_j, centred at the
  /// observed point; thawed evolves the re-prepared Gaussian exactly.
  GaussianQMode q_evolution = GaussianQMode::Frozen;
  /// Integrator steps (flow level) or reference steps (wavefunction level)
  /// per observation interval.
  std::size_t steps_per_segment = 64;

  void validate() const;
};

struct ObservationRecord {
  double t;
  PhaseSpacePoint z;
};

struct ZenoRun {
  /// N + 1 records: the start and every observation.
  std::vector<ObservationRecord> records;
  /// Flow-level segment flows f^0 ... f^{N-1} (empty at wavefunction level).
  std::vector<FlowMap> segments;
  PhaseSpacePoint endpoint;
  PhaseSpacePoint classical_endpoint;
  /// Euclidean phase-space distance between the two endpoints.
  double error = 0.0;
};

/// Unit-norm Gaussian of width sigma_meas centred at x_obs carrying momentum p_obs.
GaussianParams reprepare(std::span<const double> x_obs, std::span<const double> p_obs, double sigma_meas,
                         const SystemConfig& cfg);
GaussianParams reprepare(double x_obs, double p_obs, double sigma_meas, const SystemConfig& cfg);

/// Segment j integrates H + Q^j from the observed point with RK4 and hands
/// its endpoint unchanged to segment j + 1. H must be classical.
ZenoRun zeno_run_flow(const HamiltonianSpec& H, const MeasurementSchedule& schedule, const PhaseSpacePoint& z0,
                      double t0, double t);

/// Grid-level run (dof = 1): Crank-Nicolson per segment, Bohmian trajectory
/// from the previous observation, collapse onto reprepare(x_j, p_j).
ZenoRun zeno_run_wavefunction(const PotentialSpec& spec, const MeasurementSchedule& schedule,
                              const ComplexField& psi0, double x0, double t0, double t, const SystemConfig& cfg);

/// k_{t,t0}(z) = endpoint of zeno_run_flow over [t0, t] with the schedule's N.
AlgorithmFamily zeno_algorithm(const HamiltonianSpec& H, const MeasurementSchedule& schedule);

struct MottTrack {
  std::uint64_t seed;
  /// Emission angle in radians.
  double direction;
  std::vector<std::vector<double>> points;
  double straightness;
};

/// Max perpendicular distance from the principal-axis line over the extent
/// of the points along it (2-D).
double track_straightness(const std::vector<std::vector<double>>& points);

/// Free 2-D emission from the origin with the given speed and a direction
/// drawn from `seed`; observed at N equal intervals over [0, t].
MottTrack mott_track_demo(const SystemConfig& cfg, const MeasurementSchedule& schedule, double speed, double t,
                          std::uint64_t seed);

}  // namespace qtraj
