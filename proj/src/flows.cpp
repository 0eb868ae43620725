#include "qtraj/flows.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace qtraj {
namespace {

void check_point(const PhaseSpacePoint& z, const SystemConfig& cfg, const char* op) {
  if (z.x.size() != cfg.dof() || z.p.size() != cfg.dof()) {
    throw Error("flows", op, "phase-space point dimension must equal the system dof");
  }
  if (!all_finite(z.x) || !all_finite(z.p)) throw Error("flows", op, "phase-space point is not finite");
}

PhaseSpacePoint axpy(const PhaseSpacePoint& z, double h, const PhaseSpacePoint& d) {
  PhaseSpacePoint r = z;
  for (std::size_t j = 0; j < z.dof(); ++j) {
    r.x[j] += h * d.x[j];
    r.p[j] += h * d.p[j];
  }
  return r;
}

PhaseSpacePoint rk4_step(const HamiltonianSpec& H, const PhaseSpacePoint& z, double t, double h) {
  const auto k1 = H.field(z, t);
  const auto k2 = H.field(axpy(z, 0.5 * h, k1), t + 0.5 * h);
  const auto k3 = H.field(axpy(z, 0.5 * h, k2), t + 0.5 * h);
  const auto k4 = H.field(axpy(z, h, k3), t + h);
  PhaseSpacePoint r = z;
  for (std::size_t j = 0; j < z.dof(); ++j) {
    r.x[j] += h / 6.0 * (k1.x[j] + 2.0 * k2.x[j] + 2.0 * k3.x[j] + k4.x[j]);
    r.p[j] += h / 6.0 * (k1.p[j] + 2.0 * k2.p[j] + 2.0 * k3.p[j] + k4.p[j]);
  }
  return r;
}

void check_blowup(const PhaseSpacePoint& z, const FlowOptions& opts, const char* op, std::size_t step) {
  for (std::size_t j = 0; j < z.dof(); ++j) {
    if (!std::isfinite(z.x[j]) || !std::isfinite(z.p[j]) || std::abs(z.x[j]) > opts.blowup ||
        std::abs(z.p[j]) > opts.blowup) {
      throw Error("flows", op, "trajectory blew up at step " + std::to_string(step));
    }
  }
}

}  // namespace

double PhaseSpacePoint::distance(const PhaseSpacePoint& other) const {
  double d = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    d = std::max({d, std::abs(x[j] - other.x[j]), std::abs(p[j] - other.p[j])});
  }
  return d;
}

HamiltonianSpec::HamiltonianSpec(PotentialSpec v, SystemConfig c, std::optional<QuantumTerm> q)
    : potential(std::move(v)), cfg(std::move(c)), quantum(std::move(q)) {
  cfg.validate();
  if (potential.dimension() != cfg.dof()) {
    throw Error("flows", "HamiltonianSpec", "potential dimension must equal the system dof");
  }
  if (quantum && (!quantum->value || !quantum->gradient)) {
    throw Error("flows", "HamiltonianSpec", "quantum term needs both value and gradient");
  }
}

double HamiltonianSpec::energy(const PhaseSpacePoint& z, double t) const {
  double e = eval_potential(potential, z.x);
  for (std::size_t j = 0; j < z.dof(); ++j) e += 0.5 * z.p[j] * z.p[j] / cfg.mass(j);
  if (quantum) e += quantum->value(z.x, t);
  return e;
}

PhaseSpacePoint HamiltonianSpec::field(const PhaseSpacePoint& z, double t) const {
  PhaseSpacePoint d{std::vector<double>(z.dof()), grad_potential(potential, z.x)};
  std::vector<double> gq;
  if (quantum) {
    // RK4 stage times may overshoot the window end by rounding.
    const double slack = 1e-9 * std::max(1.0, std::abs(t));
    if (t < quantum->t_min - slack || t > quantum->t_max + slack) {
      throw Error("flows", "quantum_flow", "quantum term queried outside its time range");
    }
    gq = quantum->gradient(z.x, t);
  }
  for (std::size_t j = 0; j < z.dof(); ++j) {
    d.x[j] = z.p[j] / cfg.mass(j);
    d.p[j] = -d.p[j] - (quantum ? gq[j] : 0.0);
  }
  return d;
}

FlowMap::FlowMap(Integrator kind, std::vector<double> times, std::vector<PhaseSpacePoint> states,
                 std::vector<PhaseSpacePoint> rates)
    : kind_(kind), times_(std::move(times)), states_(std::move(states)), rates_(std::move(rates)) {
  if (times_.size() < 2 || states_.size() != times_.size() || rates_.size() != times_.size()) {
    throw Error("flows", "FlowMap", "need matching times, states and rates (at least two)");
  }
}

PhaseSpacePoint FlowMap::at(double t) const {
  const double lo = std::min(times_.front(), times_.back());
  const double hi = std::max(times_.front(), times_.back());
  if (t < lo - 1e-12 * std::max(1.0, std::abs(lo)) || t > hi + 1e-12 * std::max(1.0, std::abs(hi))) {
    throw Error("flows", "FlowMap::at", "time outside the integrated window");
  }
  const double h0 = times_[1] - times_[0];
  std::size_t k = static_cast<std::size_t>(std::max(0.0, std::floor((t - times_.front()) / h0)));
  k = std::min(k, times_.size() - 2);
  const double h = times_[k + 1] - times_[k];
  const double s = (t - times_[k]) / h;
  const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
  const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
  const auto& a = states_[k];
  const auto& b = states_[k + 1];
  const auto& da = rates_[k];
  const auto& db = rates_[k + 1];
  PhaseSpacePoint z = a;
  for (std::size_t j = 0; j < a.dof(); ++j) {
    z.x[j] = h00 * a.x[j] + h10 * h * da.x[j] + h01 * b.x[j] + h11 * h * db.x[j];
    z.p[j] = h00 * a.p[j] + h10 * h * da.p[j] + h01 * b.p[j] + h11 * h * db.p[j];
  }
  return z;
}

FlowMap classical_flow(const HamiltonianSpec& H, const PhaseSpacePoint& z0, const TimeWindow& window,
                       const FlowOptions& opts) {
  if (H.quantum) throw Error("flows", "classical_flow", "Hamiltonian carries a quantum term");
  check_point(z0, H.cfg, "classical_flow");
  const std::size_t n = window.steps();
  const double h = window.step();
  std::vector<double> times(n + 1);
  std::vector<PhaseSpacePoint> states(n + 1), rates(n + 1);
  PhaseSpacePoint z = z0;
  auto force = grad_potential(H.potential, z.x);
  times[0] = window.t0();
  states[0] = z;
  rates[0] = H.field(z, window.t0());
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::size_t j = 0; j < z.dof(); ++j) {
      z.p[j] -= 0.5 * h * force[j];
      z.x[j] += h * z.p[j] / H.cfg.mass(j);
    }
    force = grad_potential(H.potential, z.x);
    for (std::size_t j = 0; j < z.dof(); ++j) z.p[j] -= 0.5 * h * force[j];
    check_blowup(z, opts, "classical_flow", k);
    times[k] = window.time(k);
    states[k] = z;
    rates[k] = H.field(z, times[k]);
  }
  return FlowMap(Integrator::StormerVerlet, std::move(times), std::move(states), std::move(rates));
}

FlowMap quantum_flow(const HamiltonianSpec& H, const PhaseSpacePoint& z0, const TimeWindow& window,
                     const FlowOptions& opts) {
  check_point(z0, H.cfg, "quantum_flow");
  const std::size_t n = window.steps();
  const double h = window.step();
  std::vector<double> times(n + 1);
  std::vector<PhaseSpacePoint> states(n + 1), rates(n + 1);
  PhaseSpacePoint z = z0;
  times[0] = window.t0();
  states[0] = z;
  rates[0] = H.field(z, window.t0());
  for (std::size_t k = 1; k <= n; ++k) {
    z = rk4_step(H, z, window.time(k - 1), h);
    check_blowup(z, opts, "quantum_flow", k);
    times[k] = window.time(k);
    states[k] = z;
    rates[k] = H.field(z, times[k]);
  }
  return FlowMap(Integrator::RK4, std::move(times), std::move(states), std::move(rates));
}

ExtendedPoint suspended_flow(const HamiltonianSpec& H, const ExtendedPoint& start, double duration,
                             std::size_t steps) {
  check_point(start.z, H.cfg, "suspended_flow");
  if (steps < 1) throw Error("flows", "suspended_flow", "need at least one step");
  // The extended field is autonomous: time is just another coordinate whose
  // rate is 1, so every stage carries its own clock value.
  const double h = duration / static_cast<double>(steps);
  ExtendedPoint e = start;
  auto rate = [&](const ExtendedPoint& y) { return H.field(y.z, y.t); };
  auto shift = [](const ExtendedPoint& y, double a, const PhaseSpacePoint& d) {
    return ExtendedPoint{axpy(y.z, a, d), y.t + a};
  };
  for (std::size_t k = 0; k < steps; ++k) {
    const auto k1 = rate(e);
    const auto k2 = rate(shift(e, 0.5 * h, k1));
    const auto k3 = rate(shift(e, 0.5 * h, k2));
    const auto k4 = rate(shift(e, h, k3));
    for (std::size_t j = 0; j < e.z.dof(); ++j) {
      e.z.x[j] += h / 6.0 * (k1.x[j] + 2.0 * k2.x[j] + 2.0 * k3.x[j] + k4.x[j]);
      e.z.p[j] += h / 6.0 * (k1.p[j] + 2.0 * k2.p[j] + 2.0 * k3.p[j] + k4.p[j]);
    }
    e.t = start.t + static_cast<double>(k + 1) * h;
  }
  return e;
}

AlgorithmFamily euler_step_algorithm(const HamiltonianSpec& H) {
  if (H.quantum) throw Error("flows", "euler_step_algorithm", "needs a classical Hamiltonian");
  AlgorithmFamily alg;
  alg.name = "euler-step";
  alg.order = 1;
  alg.map = [H](const PhaseSpacePoint& z, double t, double t0) {
    const double dt = t - t0;
    const auto g = grad_potential(H.potential, z.x);
    PhaseSpacePoint r = z;
    for (std::size_t j = 0; j < z.dof(); ++j) {
      r.x[j] += z.p[j] / H.cfg.mass(j) * dt;
      r.p[j] -= g[j] * dt;
    }
    return r;
  };
  alg.field = [H](const PhaseSpacePoint& z, double t) { return H.field(z, t); };
  return alg;
}

AlgorithmFamily exact_flow_algorithm(const HamiltonianSpec& H, double max_step) {
  if (H.quantum) throw Error("flows", "exact_flow_algorithm", "needs a classical Hamiltonian");
  if (!(max_step > 0.0)) throw Error("flows", "exact_flow_algorithm", "max_step must be > 0");
  AlgorithmFamily alg;
  alg.name = "exact-flow";
  alg.order = 2;
  alg.map = [H, max_step](const PhaseSpacePoint& z, double t, double t0) {
    if (t == t0) return z;
    const auto steps = static_cast<std::size_t>(std::ceil(std::abs(t - t0) / max_step));
    return classical_flow(H, z, TimeWindow(t0, t, std::max<std::size_t>(steps, 1))).end();
  };
  alg.field = [H](const PhaseSpacePoint& z, double t) { return H.field(z, t); };
  return alg;
}

double algorithm_derivative_gap(const AlgorithmFamily& alg, const PhaseSpacePoint& z, double t0, double h) {
  const auto plus = alg.map(z, t0 + h, t0);
  const auto minus = alg.map(z, t0 - h, t0);
  const auto f = alg.field(z, t0);
  double gap = 0.0, scale = 1.0;
  for (std::size_t j = 0; j < z.dof(); ++j) {
    gap = std::max({gap, std::abs((plus.x[j] - minus.x[j]) / (2.0 * h) - f.x[j]),
                    std::abs((plus.p[j] - minus.p[j]) / (2.0 * h) - f.p[j])});
    scale = std::max({scale, std::abs(f.x[j]), std::abs(f.p[j])});
  }
  return gap / scale;
}

void check_algorithm(const AlgorithmFamily& alg, const PhaseSpacePoint& z, double t0, double tol) {
  const auto identity = alg.map(z, t0, t0);
  const PhaseSpacePoint origin{std::vector<double>(z.dof()), std::vector<double>(z.dof())};
  if (identity.distance(z) > 1e-12 * (1.0 + z.distance(origin))) {
    throw Error("flows", "check_algorithm", alg.name + ": k_{t0,t0} is not the identity");
  }
  const double gap = algorithm_derivative_gap(alg, z, t0);
  if (!(gap <= tol)) {
    throw Error("flows", "check_algorithm",
                alg.name + ": derivative at t0 misses the generating field by " + std::to_string(gap));
  }
}

PhaseSpacePoint trotter_compose(const AlgorithmFamily& alg, const PhaseSpacePoint& z0, const TimeWindow& window,
                                double gate_tol) {
  check_algorithm(alg, z0, window.t0(), gate_tol);
  PhaseSpacePoint z = z0;
  for (std::size_t j = 0; j < window.steps(); ++j) {
    try {
      z = alg.map(z, window.time(j + 1), window.time(j));
    } catch (const Error& e) {
      throw Error("flows", "trotter_compose", "subinterval " + std::to_string(j) + ": " + e.what());
    }
  }
  return z;
}

double symplectic_check(const PhaseMap& map, const PhaseSpacePoint& z0) {
  const std::size_t n = z0.dof();
  const auto dim = static_cast<Eigen::Index>(2 * n);
  auto flatten = [n](const PhaseSpacePoint& z) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(2 * n));
    for (std::size_t j = 0; j < n; ++j) {
      v[static_cast<Eigen::Index>(j)] = z.x[j];
      v[static_cast<Eigen::Index>(n + j)] = z.p[j];
    }
    return v;
  };
  auto unflatten = [n](const Eigen::VectorXd& v) {
    PhaseSpacePoint z{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) {
      z.x[j] = v[static_cast<Eigen::Index>(j)];
      z.p[j] = v[static_cast<Eigen::Index>(n + j)];
    }
    return z;
  };
  const Eigen::VectorXd base = flatten(z0);
  Eigen::MatrixXd jac(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double h = 1e-5 * (1.0 + std::abs(base[k]));
    Eigen::VectorXd up = base, down = base;
    up[k] += h;
    down[k] -= h;
    if (up[k] == base[k] || down[k] == base[k]) {
      throw Error("flows", "symplectic_check", "finite-difference step underflows");
    }
    jac.col(k) = (flatten(map(unflatten(up))) - flatten(map(unflatten(down)))) / (up[k] - down[k]);
  }
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
  const auto nn = static_cast<Eigen::Index>(n);
  omega.topRightCorner(nn, nn) = Eigen::MatrixXd::Identity(nn, nn);
  omega.bottomLeftCorner(nn, nn) = -Eigen::MatrixXd::Identity(nn, nn);
  return (jac.transpose() * omega * jac - omega).cwiseAbs().maxCoeff();
}

QuantumTerm gaussian_quantum_term(const GaussianParams& g0, const PotentialSpec& spec, double t0,
                                  const SystemConfig& cfg, GaussianQMode mode) {
  g0.validate("gaussian_quantum_term");
  if (g0.dof() != cfg.dof()) throw Error("flows", "gaussian_quantum_term", "Gaussian dof must equal system dof");
  QuantumTerm q;
  if (mode == GaussianQMode::Frozen) {
    q.value = [g0, cfg](std::span<const double> x, double) { return gaussian_quantum_potential(g0, x, cfg); };
    q.gradient = [g0, cfg](std::span<const double> x, double) {
      auto f = gaussian_quantum_force(g0, x, cfg);
      for (auto& v : f) v = -v;
      return f;
    };
    return q;
  }
  if (!spec.is_quadratic()) {
    throw Error("flows", "gaussian_quantum_term", "thawed Gaussian Q needs a free or harmonic potential");
  }
  q.value = [g0, spec, t0, cfg](std::span<const double> x, double t) {
    return gaussian_quantum_potential(gaussian_exact_evolve(g0, spec, t, t0, cfg), x, cfg);
  };
  q.gradient = [g0, spec, t0, cfg](std::span<const double> x, double t) {
    auto f = gaussian_quantum_force(gaussian_exact_evolve(g0, spec, t, t0, cfg), x, cfg);
    for (auto& v : f) v = -v;
    return f;
  };
  return q;
}

}  // namespace qtraj
