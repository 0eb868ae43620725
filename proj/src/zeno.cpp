#include "qtraj/zeno.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qtraj/bohm.hpp"
#include "qtraj/propagators.hpp"

namespace qtraj {
namespace {

double euclidean(const PhaseSpacePoint& a, const PhaseSpacePoint& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.dof(); ++j) {
    s += (a.x[j] - b.x[j]) * (a.x[j] - b.x[j]) + (a.p[j] - b.p[j]) * (a.p[j] - b.p[j]);
  }
  return std::sqrt(s);
}

PhaseSpacePoint classical_reference(const HamiltonianSpec& H, const PhaseSpacePoint& z0, double t0, double t,
                                    std::size_t min_steps) {
  const std::size_t steps = std::max<std::size_t>(min_steps, 20000);
  return classical_flow(H, z0, TimeWindow(t0, t, steps)).end();
}

}  // namespace

void MeasurementSchedule::validate() const {
  if (N < 1) throw Error("zeno", "MeasurementSchedule", "N must be >= 1");
  if (!(sigma_meas > 0.0) || !std::isfinite(sigma_meas)) {
    throw Error("zeno", "MeasurementSchedule", "sigma_meas must be > 0");
  }
  if (steps_per_segment < 2) throw Error("zeno", "MeasurementSchedule", "steps_per_segment must be >= 2");
}

GaussianParams reprepare(std::span<const double> x_obs, std::span<const double> p_obs, double sigma_meas,
                         const SystemConfig& cfg) {
  if (x_obs.size() != cfg.dof() || p_obs.size() != cfg.dof()) {
    throw Error("zeno", "reprepare", "observation dimension must equal the system dof");
  }
  return GaussianParams::normalized(std::vector<double>(x_obs.begin(), x_obs.end()),
                                    std::vector<double>(cfg.dof(), sigma_meas),
                                    std::vector<double>(p_obs.begin(), p_obs.end()));
}

GaussianParams reprepare(double x_obs, double p_obs, double sigma_meas, const SystemConfig& cfg) {
  return reprepare(std::span<const double>(&x_obs, 1), std::span<const double>(&p_obs, 1), sigma_meas, cfg);
}

ZenoRun zeno_run_flow(const HamiltonianSpec& H, const MeasurementSchedule& schedule, const PhaseSpacePoint& z0,
                      double t0, double t) {
  schedule.validate();
  if (H.quantum) throw Error("zeno", "zeno_run_flow", "H must be the classical Hamiltonian");
  const TimeWindow window(t0, t, schedule.N);
  ZenoRun run;
  run.records.push_back({t0, z0});
  PhaseSpacePoint z = z0;
  for (std::size_t j = 0; j < schedule.N; ++j) {
    const double a = window.time(j), b = window.time(j + 1);
    const auto g = reprepare(z.x, z.p, schedule.sigma_meas, H.cfg);
    auto q = gaussian_quantum_term(g, H.potential, a, H.cfg, schedule.q_evolution);
    q.t_min = std::min(a, b);
    q.t_max = std::max(a, b);
    const HamiltonianSpec segment(H.potential, H.cfg, std::move(q));
    try {
      run.segments.push_back(quantum_flow(segment, z, TimeWindow(a, b, schedule.steps_per_segment)));
    } catch (const Error& e) {
      throw Error("zeno", "zeno_run_flow", "segment " + std::to_string(j) + ": " + e.what());
    }
    z = run.segments.back().end();
    run.records.push_back({b, z});
  }
  run.endpoint = z;
  run.classical_endpoint = classical_reference(H, z0, t0, t, schedule.N * schedule.steps_per_segment);
  run.error = euclidean(run.endpoint, run.classical_endpoint);
  return run;
}

ZenoRun zeno_run_wavefunction(const PotentialSpec& spec, const MeasurementSchedule& schedule,
                              const ComplexField& psi0, double x0, double t0, double t, const SystemConfig& cfg) {
  schedule.validate();
  if (cfg.dof() != 1) throw Error("zeno", "zeno_run_wavefunction", "wavefunction level needs dof = 1");
  const TimeWindow window(t0, t, schedule.N);
  const double m = cfg.mass(0);

  const auto v0 = velocity_field(psi0, cfg);
  const double p0 = m * cubic_interpolate<double>(v0.v, psi0.grid.x_min(), psi0.grid.dx(), x0);
  ZenoRun run;
  run.records.push_back({t0, PhaseSpacePoint{{x0}, {p0}}});

  ComplexField psi = psi0;
  double x = x0, p = p0;
  for (std::size_t j = 0; j < schedule.N; ++j) {
    const double a = window.time(j), b = window.time(j + 1);
    const TimeWindow segment(a, b, schedule.steps_per_segment);
    Evolution ev;
    try {
      ev.fields = reference_evolve_snapshots(spec, psi, segment, cfg);
    } catch (const Error& e) {
      throw Error("zeno", "zeno_run_wavefunction", "segment " + std::to_string(j) + ": " + e.what());
    }
    for (std::size_t k = 0; k <= segment.steps(); ++k) ev.times.push_back(segment.time(k));
    const auto traj = integrate_bohm_trajectory(ev, x, cfg);
    if (traj.termination != Termination::Completed) {
      throw Error("zeno", "zeno_run_wavefunction",
                  "segment " + std::to_string(j) + ": trajectory stopped at a " + to_string(traj.termination));
    }
    x = traj.samples.back().x;
    p = traj.samples.back().p;
    run.records.push_back({b, PhaseSpacePoint{{x}, {p}}});
    psi = sample_gaussian(reprepare(x, p, schedule.sigma_meas, cfg), psi.grid, cfg.hbar);
  }
  run.endpoint = run.records.back().z;
  const HamiltonianSpec H(spec, cfg);
  run.classical_endpoint = classical_reference(H, run.records.front().z, t0, t, 0);
  run.error = euclidean(run.endpoint, run.classical_endpoint);
  return run;
}

AlgorithmFamily zeno_algorithm(const HamiltonianSpec& H, const MeasurementSchedule& schedule) {
  schedule.validate();
  AlgorithmFamily alg;
  alg.name = "zeno-composed";
  alg.order = 1;
  alg.map = [H, schedule](const PhaseSpacePoint& z, double t, double t0) {
    if (t == t0) return z;
    return zeno_run_flow(H, schedule, z, t0, t).endpoint;
  };
  alg.field = [H](const PhaseSpacePoint& z, double t) { return H.field(z, t); };
  return alg;
}

double track_straightness(const std::vector<std::vector<double>>& points) {
  if (points.size() < 3) throw Error("zeno", "track_straightness", "need at least three points");
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& q : points) {
    if (q.size() != 2) throw Error("zeno", "track_straightness", "points must be two-dimensional");
    mean += Eigen::Vector2d(q[0], q[1]);
  }
  mean /= static_cast<double>(points.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& q : points) {
    const Eigen::Vector2d d = Eigen::Vector2d(q[0], q[1]) - mean;
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const Eigen::Vector2d axis = eig.eigenvectors().col(1);
  double lo = 0.0, hi = 0.0, off = 0.0;
  for (const auto& q : points) {
    const Eigen::Vector2d d = Eigen::Vector2d(q[0], q[1]) - mean;
    const double along = d.dot(axis);
    lo = std::min(lo, along);
    hi = std::max(hi, along);
    off = std::max(off, std::abs(d.x() * axis.y() - d.y() * axis.x()));
  }
  if (hi - lo <= 0.0) throw Error("zeno", "track_straightness", "track has zero length");
  return off / (hi - lo);
}

MottTrack mott_track_demo(const SystemConfig& cfg, const MeasurementSchedule& schedule, double speed, double t,
                          std::uint64_t seed) {
  if (cfg.dof() != 2) throw Error("zeno", "mott_track_demo", "the track demo needs dof = 2");
  if (schedule.N < 3) throw Error("zeno", "mott_track_demo", "N must be >= 3 for a meaningful line fit");
  if (!(speed > 0.0)) throw Error("zeno", "mott_track_demo", "emission speed must be > 0");
  std::mt19937_64 rng(seed);
  // 53 random bits mapped to [0, 1): identical on every standard library.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const double theta = 2.0 * std::numbers::pi * u;
  PhaseSpacePoint z0{{0.0, 0.0}, {cfg.mass(0) * speed * std::cos(theta), cfg.mass(1) * speed * std::sin(theta)}};
  const HamiltonianSpec H(PotentialSpec::free(2), cfg);
  const auto run = zeno_run_flow(H, schedule, z0, 0.0, t);
  MottTrack track{seed, theta, {}, 0.0};
  for (const auto& r : run.records) track.points.push_back(r.z.x);
  track.straightness = track_straightness(track.points);
  return track;
}

}  // namespace qtraj
