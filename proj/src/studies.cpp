#include "qtraj/studies.hpp"

#include <algorithm>
#include <cmath>

#include "qtraj/action.hpp"
#include "qtraj/bohm.hpp"
#include "qtraj/flows.hpp"
#include "qtraj/propagators.hpp"
#include "qtraj/zeno.hpp"

namespace qtraj {
namespace {

constexpr const char* kOp = "run_scenario";

Cell real(double v) { return Cell{v}; }
Cell integer(std::size_t v) { return Cell{static_cast<std::int64_t>(v)}; }
Cell text(std::string s) { return Cell{std::move(s)}; }
Cell empty() { return Cell{}; }

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error("cli", kOp, msg);
}

ComplexField initial_field(const ScenarioConfig& cfg) {
  const auto grid = cfg.spatial_grid();
  if (cfg.initial.samples) return ComplexField(grid, *cfg.initial.samples);
  require(cfg.initial.gaussian.has_value(), "scenario has no initial state");
  require(cfg.system.dof() == 1, "grid studies need system.dof = 1");
  return sample_gaussian(*cfg.initial.gaussian, grid, cfg.system.hbar);
}

const GaussianParams& initial_gaussian(const ScenarioConfig& cfg, const char* study) {
  require(cfg.initial.gaussian.has_value(), std::string(study) + " needs a Gaussian initial state");
  return *cfg.initial.gaussian;
}

KernelSpec make_kernel(const std::string& name, const ScenarioConfig& cfg) {
  const auto& V = cfg.potential_spec();
  if (name == "exact-free") {
    require(std::holds_alternative<FreePotential>(V.variant()), "the exact-free kernel needs potential.kind free");
    return KernelSpec(ExactFreeKernel{}, cfg.system);
  }
  if (name == "mehler") {
    const auto* h = std::get_if<HarmonicPotential>(&V.variant());
    require(h != nullptr, "the mehler kernel needs potential.kind harmonic");
    require(cfg.system.dof() == 1 || std::all_of(cfg.system.masses.begin(), cfg.system.masses.end(),
                                                 [&](double m) { return m == cfg.system.mass(0); }),
            "the mehler kernel needs equal masses");
    return KernelSpec(MehlerKernel{cfg.system.mass(0), effective_frequency(V, cfg.system, 0)}, cfg.system);
  }
  if (name == "van-vleck") return KernelSpec(VanVleckKernel{V}, cfg.system);
  if (name == "kerner-sutcliffe") return KernelSpec(KernerSutcliffeKernel{AveragedPotential(V)}, cfg.system);
  throw Error("cli", kOp, "unknown kernel '" + name + "'");
}

/// Exact kernel used as the oracle of a kernel study.
KernelSpec oracle_kernel(const ScenarioConfig& cfg) {
  const auto& V = cfg.potential_spec();
  if (std::holds_alternative<FreePotential>(V.variant())) return make_kernel("exact-free", cfg);
  if (std::holds_alternative<HarmonicPotential>(V.variant())) return make_kernel("mehler", cfg);
  throw Error("cli", kOp, "kernel studies need a free or harmonic potential (closed-form oracle)");
}

ResultTable convergence_table() { return ResultTable({"series", "step", "error", "fitted_order"}); }

void add_series(ResultTable& table, const std::string& name, const std::vector<ConvergenceSample>& samples) {
  for (const auto& s : samples) table.add_row({text(name), real(s.h), real(s.error), empty()});
  table.add_row({text(name), empty(), empty(), real(fit_convergence_order(samples))});
}

void add_value(ResultTable& table, const std::string& name, double value) {
  table.add_row({text(name), empty(), real(value), empty()});
}

/// Closed-form classical endpoint for free and harmonic potentials (dof 1).
PhaseSpacePoint classical_endpoint(const HamiltonianSpec& H, const PhaseSpacePoint& z0, double t0, double t) {
  const double m = H.cfg.mass(0), tau = t - t0;
  const double w = effective_frequency(H.potential, H.cfg, 0);
  const double x0 = z0.x[0], p0 = z0.p[0];
  if (std::holds_alternative<HarmonicPotential>(H.potential.variant())) {
    return {{x0 * std::cos(w * tau) + p0 / (m * w) * std::sin(w * tau)},
            {p0 * std::cos(w * tau) - m * w * x0 * std::sin(w * tau)}};
  }
  if (std::holds_alternative<FreePotential>(H.potential.variant())) return {{x0 + p0 / m * tau}, {p0}};
  return classical_flow(H, z0, TimeWindow(t0, t, 20000)).end();
}

double euclidean(const PhaseSpacePoint& a, const PhaseSpacePoint& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.dof(); ++j) {
    s += (a.x[j] - b.x[j]) * (a.x[j] - b.x[j]) + (a.p[j] - b.p[j]) * (a.p[j] - b.p[j]);
  }
  return std::sqrt(s);
}

/// Wavefunction snapshots at t0 + k * spacing, k = 0..count.
Evolution make_evolution(const ScenarioConfig& cfg, const ComplexField& psi0, double spacing, std::size_t count,
                         bool analytic, std::size_t substeps) {
  Evolution ev;
  const double t0 = cfg.time.t0;
  for (std::size_t k = 0; k <= count; ++k) ev.times.push_back(t0 + static_cast<double>(k) * spacing);
  if (analytic) {
    const auto& g = initial_gaussian(cfg, "analytic evolution");
    require(cfg.potential_spec().is_quadratic(), "analytic evolution needs a free or harmonic potential");
    for (double t : ev.times) {
      ev.fields.push_back(t == t0 ? psi0
                                  : sample_gaussian(gaussian_exact_evolve(g, cfg.potential_spec(), t, t0, cfg.system),
                                                    psi0.grid, cfg.system.hbar));
    }
  } else {
    ev.fields = reference_evolve_snapshots(cfg.potential_spec(), psi0,
                                           TimeWindow(t0, t0 + spacing * static_cast<double>(count), count),
                                           cfg.system, substeps);
  }
  return ev;
}

ResultTable run_propagate(const ScenarioConfig& cfg) {
  const auto psi0 = initial_field(cfg);
  const TimeWindow window(cfg.time.t0, cfg.time.t, cfg.time.steps);
  const ComplexField psi = cfg.propagate.kernel == "reference"
                               ? reference_evolve(cfg.potential_spec(), psi0, window, cfg.system)
                               : time_slice_evolve(make_kernel(cfg.propagate.kernel, cfg), psi0, window).psi;
  ResultTable table({"x", "re", "im", "rho"});
  for (std::size_t i = 0; i < psi.size(); ++i) {
    table.add_row({real(psi.grid.x(i)), real(psi.values[i].real()), real(psi.values[i].imag()),
                   real(std::norm(psi.values[i]))});
  }
  return table;
}

ResultTable run_bohm(const ScenarioConfig& cfg) {
  const auto psi0 = initial_field(cfg);
  const bool analytic = cfg.bohm.evolution == "analytic";
  const double spacing = (cfg.time.t - cfg.time.t0) / static_cast<double>(cfg.time.steps);
  const auto ev = make_evolution(cfg, psi0, spacing, cfg.time.steps, analytic, cfg.bohm.substeps);
  ResultTable table({"trajectory", "t", "x", "p", "Q", "termination"});
  for (std::size_t k = 0; k < cfg.bohm.x0.size(); ++k) {
    const auto traj = integrate_bohm_trajectory(ev, cfg.bohm.x0[k], cfg.system);
    for (const auto& s : traj.samples) {
      table.add_row({integer(k), real(s.t), real(s.x), real(s.p), real(s.Q), text(to_string(traj.termination))});
    }
  }
  return table;
}

ResultTable study_kernel(const ScenarioConfig& cfg) {
  const auto& c = cfg.convergence;
  const auto approx = make_kernel(c.kernel, cfg);
  const auto oracle = oracle_kernel(cfg);
  std::vector<ConvergenceSample> abs_err, rel_err;
  for (double dt : c.dt) {
    const cplx k = kernel(approx, c.x, c.x0, cfg.time.t0 + dt, cfg.time.t0);
    const cplx ref = kernel(oracle, c.x, c.x0, cfg.time.t0 + dt, cfg.time.t0);
    abs_err.push_back({dt, std::abs(k - ref)});
    rel_err.push_back({dt, std::abs(k - ref) / std::abs(ref)});
  }
  auto table = convergence_table();
  add_series(table, "kernel_abs", abs_err);
  add_series(table, "kernel_rel", rel_err);
  return table;
}

ResultTable study_action(const ScenarioConfig& cfg) {
  const auto& c = cfg.convergence;
  const auto& V = cfg.potential_spec();
  const AveragedPotential avg(V);
  std::vector<ConvergenceSample> err;
  for (double dt : c.dt) {
    const double t0 = cfg.time.t0;
    const double approx = short_time_action(avg, c.x, c.x0, t0 + dt, t0, cfg.system).value;
    double exact = 0.0;
    if (V.is_quadratic()) {
      exact = exact_action(V, c.x, c.x0, dt, cfg.system).value;
    } else {
      const double x = c.x, x0 = c.x0;
      exact = action_by_shooting(V, std::span<const double>(&x, 1), std::span<const double>(&x0, 1), t0 + dt, t0,
                                 cfg.system)
                  .action;
    }
    err.push_back({dt, std::abs(exact - approx)});
  }
  auto table = convergence_table();
  add_series(table, "action", err);
  return table;
}

ResultTable study_wavefunction(const ScenarioConfig& cfg) {
  const auto& c = cfg.convergence;
  const auto psi0 = initial_field(cfg);
  const auto k = make_kernel(c.kernel, cfg);
  std::vector<ConvergenceSample> err;
  for (double dt : c.dt) {
    const double t0 = cfg.time.t0;
    const auto slice = apply_kernel(k, psi0, t0 + dt, t0);
    const auto ref = reference_evolve(cfg.potential_spec(), psi0, TimeWindow(t0, t0 + dt, c.reference_steps),
                                      cfg.system);
    err.push_back({dt, l2_distance(slice, ref)});
  }
  auto table = convergence_table();
  add_series(table, "wavefunction_l2", err);
  return table;
}

ResultTable study_time_slicing(const ScenarioConfig& cfg) {
  const auto& c = cfg.convergence;
  const auto psi0 = initial_field(cfg);
  const auto k = make_kernel(c.kernel, cfg);
  const auto ref = reference_evolve(cfg.potential_spec(), psi0, TimeWindow(cfg.time.t0, cfg.time.t, c.reference_steps),
                                    cfg.system);
  std::vector<ConvergenceSample> err;
  for (auto n : c.N) {
    const auto sliced = time_slice_evolve(k, psi0, TimeWindow(cfg.time.t0, cfg.time.t, n));
    err.push_back({1.0 / static_cast<double>(n), l2_distance(sliced.psi, ref)});
  }
  auto table = convergence_table();
  add_series(table, "time_slicing_l2", err);
  return table;
}

/// Bohmian short-time laws along a grid trajectory.
ResultTable study_theorem1(const ScenarioConfig& cfg) {
  const auto& c = cfg.convergence;
  const auto psi0 = initial_field(cfg);
  const auto& V = cfg.potential_spec();
  const double dt_min = *std::min_element(c.dt.begin(), c.dt.end());
  const double dt_max = *std::max_element(c.dt.begin(), c.dt.end());
  const double spacing = dt_min / static_cast<double>(c.snapshots_per_dt);
  for (double dt : c.dt) {
    const double steps = dt / (2.0 * spacing);
    require(std::abs(steps - std::round(steps)) < 1e-9 * steps,
            "every convergence.dt must be an even multiple of the snapshot spacing");
  }
  const auto count = static_cast<std::size_t>(std::llround(dt_max / spacing));
  const bool analytic = cfg.initial.gaussian && !cfg.initial.samples && V.is_quadratic();
  const auto ev = make_evolution(cfg, psi0, spacing, count, analytic, 1);
  const auto traj = integrate_bohm_trajectory(ev, c.x0, cfg.system);
  require(traj.termination == Termination::Completed,
          "trajectory stopped at a " + to_string(traj.termination) + " before the largest dt");

  const double m = cfg.system.mass(0);
  const auto& first = traj.samples.front();
  const double x0 = first.x, p0 = first.p;
  const double gv = grad_potential(V, x0);
  // Quantum force at the start from the t0 quantum potential field.
  const auto q0 = quantum_potential(polar_decompose(psi0, cfg.system), cfg.system);
  const auto& g = psi0.grid;
  const double gq = (cubic_interpolate<double>(q0.Q, g.x_min(), g.dx(), x0 + g.dx()) -
                     cubic_interpolate<double>(q0.Q, g.x_min(), g.dx(), x0 - g.dx())) /
                    (2.0 * g.dx());

  std::vector<ConvergenceSample> pos, mom, mom_q;
  for (double dt : c.dt) {
    const auto it = std::find_if(traj.samples.begin(), traj.samples.end(), [&](const BohmSample& s) {
      return std::abs(s.t - first.t - dt) <= 1e-9 * std::max(1.0, dt);
    });
    require(it != traj.samples.end(), "no trajectory sample at t0 + dt");
    pos.push_back({dt, std::abs(it->x - x0 - p0 / m * dt)});
    mom.push_back({dt, std::abs(it->p - p0 + gv * dt)});
    mom_q.push_back({dt, std::abs(it->p - p0 + (gv + gq) * dt)});
  }
  auto table = convergence_table();
  add_series(table, "position", pos);
  add_series(table, "momentum", mom);
  add_series(table, "momentum_with_quantum_force", mom_q);
  return table;
}

/// Phase-space start on the Gaussian at x0 with its Bohm momentum.
PhaseSpacePoint bohm_start(const GaussianParams& g, double x0, const SystemConfig& sys) {
  const auto v = gaussian_velocity(g, std::span<const double>(&x0, 1), sys);
  return {{x0}, {sys.mass(0) * v[0]}};
}

ResultTable study_theorem2(const ScenarioConfig& cfg) {
  const auto& c = cfg.convergence;
  const auto& g = initial_gaussian(cfg, "theorem2");
  const auto& V = cfg.potential_spec();
  require(cfg.system.dof() == 1, "theorem2 needs system.dof = 1");
  const double t0 = cfg.time.t0;
  const auto q = gaussian_quantum_term(g, V, t0, cfg.system, GaussianQMode::Thawed);
  const HamiltonianSpec H(V, cfg.system, q);
  const auto z0 = bohm_start(g, c.x0, cfg.system);
  const double q0 = q.value(z0.x, t0);
  std::vector<ConvergenceSample> drift;
  for (double dt : c.dt) {
    const auto z = quantum_flow(H, z0, TimeWindow(t0, t0 + dt, c.reference_steps)).end();
    double d = std::abs(q.value(z.x, t0 + dt) - q0);
    if (d <= 1e-12 * std::abs(q0)) d = 0.0;
    drift.push_back({dt, d});
  }
  auto table = convergence_table();
  add_series(table, "q_drift", drift);
  return table;
}

ResultTable study_theorem3(const ScenarioConfig& cfg) {
  const auto& c = cfg.convergence;
  const auto& g = initial_gaussian(cfg, "theorem3");
  const auto& V = cfg.potential_spec();
  require(cfg.system.dof() == 1, "theorem3 needs system.dof = 1");
  const double t0 = cfg.time.t0;
  const HamiltonianSpec classical(V, cfg.system);
  const HamiltonianSpec quantum(V, cfg.system, gaussian_quantum_term(g, V, t0, cfg.system, GaussianQMode::Frozen));
  auto gaps = [&](double x0) {
    const auto z0 = bohm_start(g, x0, cfg.system);
    std::vector<ConvergenceSample> out;
    for (double dt : c.dt) {
      const TimeWindow w(t0, t0 + dt, c.reference_steps);
      out.push_back({dt, quantum_flow(quantum, z0, w).end().distance(classical_flow(classical, z0, w).end())});
    }
    return out;
  };
  auto table = convergence_table();
  add_series(table, "flow_gap", gaps(c.x0));
  add_series(table, "flow_gap_off_centre", gaps(c.x0 + g.sigma(0)));
  return table;
}

ResultTable study_theorem4(const ScenarioConfig& cfg) {
  const auto& c = cfg.convergence;
  require(cfg.system.dof() == 1, "theorem4 needs system.dof = 1");
  const HamiltonianSpec H(cfg.potential_spec(), cfg.system);
  const PhaseSpacePoint z0{{c.x0}, {c.p0}};
  const auto target = classical_endpoint(H, z0, cfg.time.t0, cfg.time.t);
  const auto alg = euler_step_algorithm(H);
  std::vector<ConvergenceSample> err;
  for (auto n : c.N) {
    const auto z = trotter_compose(alg, z0, TimeWindow(cfg.time.t0, cfg.time.t, n));
    err.push_back({1.0 / static_cast<double>(n), euclidean(z, target)});
  }
  auto table = convergence_table();
  add_series(table, "trotter_error", err);
  return table;
}

ResultTable study_invariants(const ScenarioConfig& cfg) {
  const auto& c = cfg.convergence;
  const auto& V = cfg.potential_spec();
  const auto& sys = cfg.system;
  require(sys.dof() == 1, "invariants need system.dof = 1");
  const auto psi0 = initial_field(cfg);
  auto table = convergence_table();

  add_value(table, "qp_form_gap", quantum_potential_form_gap(quantum_potential(polar_decompose(psi0, sys), sys)));

  const AveragedPotential avg(V);
  double coincide = 0.0, half = 0.0;
  for (std::size_t i = 0; i <= 100; ++i) {
    const double x = cfg.grid.x_min + (cfg.grid.x_max - cfg.grid.x_min) * static_cast<double>(i) / 100.0;
    const double v = eval_potential(V, x);
    coincide = std::max(coincide, std::abs(averaged_potential(avg, x, x) - v) / std::max(1.0, std::abs(v)));
    const double gv = grad_potential(V, x);
    half = std::max(half, std::abs(averaged_potential_gradient(avg, x, x) - 0.5 * gv) / std::max(1.0, std::abs(gv)));
  }
  add_value(table, "vbar_coincidence", coincide);
  add_value(table, "vbar_half_gradient", half);

  const auto evolved = reference_evolve(V, psi0, TimeWindow(cfg.time.t0, cfg.time.t, 1000), sys);
  add_value(table, "reference_norm_drift_per_1000_steps", std::abs(l2_norm(evolved) - l2_norm(psi0)) / l2_norm(psi0));

  const PhaseSpacePoint z0{{c.x0}, {c.p0}};
  const HamiltonianSpec classical(V, sys);
  add_value(table, "symplectic_classical", symplectic_check([&](const PhaseSpacePoint& z) {
              return classical_flow(classical, z, TimeWindow(0.0, 1.0, 1000)).end();
            }, z0));
  if (cfg.initial.gaussian && V.is_quadratic()) {
    const HamiltonianSpec quantum(V, sys, gaussian_quantum_term(*cfg.initial.gaussian, V, 0.0, sys,
                                                                GaussianQMode::Thawed));
    add_value(table, "symplectic_gaussian_q", symplectic_check([&](const PhaseSpacePoint& z) {
                return quantum_flow(quantum, z, TimeWindow(0.0, 0.5, 500)).end();
              }, z0));
  }

  // Continuity residual under joint refinement of dx and dt (dt = dx / 2).
  std::vector<ConvergenceSample> residual;
  const double horizon = 0.5;
  const auto& g = initial_gaussian(cfg, "the continuity refinement");
  for (auto points : c.points) {
    const SpatialGrid grid(cfg.grid.x_min, cfg.grid.x_max, points);
    const auto start = sample_gaussian(g, grid, sys.hbar);
    const auto steps = static_cast<std::size_t>(std::llround(horizon / (0.5 * grid.dx())));
    const double dt = horizon / static_cast<double>(steps);
    const auto a = reference_evolve(V, start, TimeWindow(0.0, horizon, steps), sys);
    const auto b = reference_evolve(V, a, TimeWindow(horizon, horizon + dt, 1), sys);
    residual.push_back({grid.dx(), continuity_residual(a, b, dt, sys).relative});
  }
  add_series(table, "continuity_residual", residual);
  return table;
}

ResultTable run_convergence(const ScenarioConfig& cfg) {
  const auto& s = cfg.convergence.study;
  if (s == "kernel") return study_kernel(cfg);
  if (s == "action") return study_action(cfg);
  if (s == "wavefunction") return study_wavefunction(cfg);
  if (s == "time-slicing") return study_time_slicing(cfg);
  if (s == "theorem1") return study_theorem1(cfg);
  if (s == "theorem2") return study_theorem2(cfg);
  if (s == "theorem3") return study_theorem3(cfg);
  if (s == "theorem4") return study_theorem4(cfg);
  if (s == "invariants") return study_invariants(cfg);
  throw Error("cli", kOp, "unknown convergence study '" + s + "'");
}

ResultTable run_zeno(const ScenarioConfig& cfg) {
  const auto& z = cfg.zeno;
  require(cfg.system.dof() == 1, "the zeno task needs system.dof = 1 (use mott for 2-D)");
  ResultTable table({"N", "endpoint_x", "endpoint_p", "classical_error", "sigma_meas"});
  for (double sigma : z.sigma_meas) {
    for (auto n : z.N) {
      MeasurementSchedule schedule;
      schedule.N = n;
      schedule.sigma_meas = sigma;
      schedule.steps_per_segment = z.steps_per_segment;
      schedule.q_evolution = z.q_evolution == "thawed" ? GaussianQMode::Thawed : GaussianQMode::Frozen;
      ZenoRun run;
      if (z.mode == "flow") {
        schedule.mode = MeasurementMode::FlowLevel;
        const HamiltonianSpec H(cfg.potential_spec(), cfg.system);
        run = zeno_run_flow(H, schedule, PhaseSpacePoint{z.z0_x, z.z0_p}, cfg.time.t0, cfg.time.t);
      } else {
        schedule.mode = MeasurementMode::WavefunctionLevel;
        run = zeno_run_wavefunction(cfg.potential_spec(), schedule, initial_field(cfg), z.x0, cfg.time.t0,
                                    cfg.time.t, cfg.system);
      }
      table.add_row({integer(n), real(run.endpoint.x[0]), real(run.endpoint.p[0]), real(run.error), real(sigma)});
    }
  }
  return table;
}

ResultTable run_mott(const ScenarioConfig& cfg) {
  const auto& m = cfg.mott;
  require(cfg.seed_given, "the mott task draws random emission directions and needs a seed");
  MeasurementSchedule schedule;
  schedule.N = m.N;
  schedule.sigma_meas = m.sigma_meas;
  schedule.steps_per_segment = m.steps_per_segment;
  ResultTable table({"emission", "seed", "direction", "straightness"});
  for (std::size_t k = 0; k < m.emissions; ++k) {
    const std::uint64_t seed = cfg.seed + k;
    const auto track = mott_track_demo(cfg.system, schedule, m.speed, m.t, seed);
    table.add_row({integer(k), text(std::to_string(seed)), real(track.direction), real(track.straightness)});
  }
  return table;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  switch (cfg.task) {
    case Task::Propagate:
      return {run_propagate(cfg), ""};
    case Task::Bohm:
      return {run_bohm(cfg), ""};
    case Task::Convergence:
      return {run_convergence(cfg), cfg.convergence.study};
    case Task::Zeno:
      return {run_zeno(cfg), ""};
    case Task::Mott:
      return {run_mott(cfg), ""};
  }
  throw Error("cli", kOp, "unknown task");
}

}  // namespace qtraj
