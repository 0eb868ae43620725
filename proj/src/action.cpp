#include "qtraj/action.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace qtraj {
namespace {

constexpr double kCausticGuard = 1e-8;

void require_same_size(std::span<const double> x, std::span<const double> x0,
                       const SystemConfig& cfg, const char* op) {
  if (x.size() != x0.size() || x.size() != cfg.dof()) {
    throw Error("action", op, "position sizes must match the system dof");
  }
}

bool is_harmonic(const PotentialSpec& spec) {
  return std::holds_alternative<HarmonicPotential>(spec.variant());
}

void require_closed_form(const PotentialSpec& spec, const char* op) {
  if (!spec.is_quadratic()) {
    throw Error("action", op, "closed-form action exists only for free and harmonic potentials");
  }
}

struct Phase {
  std::vector<double> x;
  std::vector<double> p;
};

Phase hamilton_rhs(const PotentialSpec& spec, const SystemConfig& cfg, const Phase& z) {
  Phase d{std::vector<double>(z.x.size()), grad_potential(spec, z.x)};
  for (std::size_t j = 0; j < z.x.size(); ++j) {
    d.x[j] = z.p[j] / cfg.mass(j);
    d.p[j] = -d.p[j];
  }
  return d;
}

Phase axpy(const Phase& z, double h, const Phase& d) {
  Phase r = z;
  for (std::size_t j = 0; j < z.x.size(); ++j) {
    r.x[j] += h * d.x[j];
    r.p[j] += h * d.p[j];
  }
  return r;
}

Phase rk4_step(const PotentialSpec& spec, const SystemConfig& cfg, const Phase& z, double h) {
  const Phase k1 = hamilton_rhs(spec, cfg, z);
  const Phase k2 = hamilton_rhs(spec, cfg, axpy(z, 0.5 * h, k1));
  const Phase k3 = hamilton_rhs(spec, cfg, axpy(z, 0.5 * h, k2));
  const Phase k4 = hamilton_rhs(spec, cfg, axpy(z, h, k3));
  Phase r = z;
  for (std::size_t j = 0; j < z.x.size(); ++j) {
    r.x[j] += h / 6.0 * (k1.x[j] + 2.0 * k2.x[j] + 2.0 * k3.x[j] + k4.x[j]);
    r.p[j] += h / 6.0 * (k1.p[j] + 2.0 * k2.p[j] + 2.0 * k3.p[j] + k4.p[j]);
  }
  return r;
}

std::vector<double> shoot_endpoint(const PotentialSpec& spec, const SystemConfig& cfg,
                                   std::span<const double> x0, const std::vector<double>& p0,
                                   double dt, std::size_t steps) {
  Phase z{std::vector<double>(x0.begin(), x0.end()), p0};
  const double h = dt / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) z = rk4_step(spec, cfg, z, h);
  return z.x;
}

}  // namespace

double free_generating_function(std::span<const double> x, std::span<const double> x0,
                                const SystemConfig& cfg) {
  require_same_size(x, x0, cfg, "free_generating_function");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - x0[j];
    s += 0.5 * cfg.mass(j) * d * d;
  }
  return s;
}

double first_order_action_term(const AveragedPotential& avg, std::span<const double> x,
                               std::span<const double> x0) {
  return -averaged_potential(avg, x, x0);
}

ActionValue short_time_action(const AveragedPotential& avg, std::span<const double> x,
                              std::span<const double> x0, double t, double t0,
                              const SystemConfig& cfg) {
  const double dt = t - t0;
  if (dt == 0.0) throw Error("action", "short_time_action", "t must differ from t0");
  const double s0 = free_generating_function(x, x0, cfg);
  const double s1 = first_order_action_term(avg, x, x0);
  return {s0 / dt + s1 * dt, ActionMethod::ShortTime};
}

ActionValue short_time_action(const AveragedPotential& avg, double x, double x0, double t,
                              double t0, const SystemConfig& cfg) {
  return short_time_action(avg, std::span<const double>(&x, 1), std::span<const double>(&x0, 1), t,
                           t0, cfg);
}

double effective_frequency(const PotentialSpec& spec, const SystemConfig& cfg, std::size_t j) {
  if (const auto* h = std::get_if<HarmonicPotential>(&spec.variant())) {
    return h->omega * std::sqrt(h->mass / cfg.mass(j));
  }
  return 0.0;
}

ActionPartials exact_action_partials(const PotentialSpec& spec, std::span<const double> x,
                                     std::span<const double> x0, double t,
                                     const SystemConfig& cfg) {
  require_closed_form(spec, "exact_action");
  require_same_size(x, x0, cfg, "exact_action");
  if (spec.dimension() != cfg.dof()) {
    throw Error("action", "exact_action", "potential dimension must equal dof");
  }
  if (t == 0.0) throw Error("action", "exact_action", "elapsed time must be non-zero");
  const std::size_t n = x.size();
  ActionPartials d{0.0, std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    const double m = cfg.mass(j);
    if (is_harmonic(spec)) {
      const double w = effective_frequency(spec, cfg, j);
      const double s = std::sin(w * t);
      const double c = std::cos(w * t);
      if (std::abs(s) < kCausticGuard) {
        throw Error("action", "exact_action", "caustic: sin(omega t) is numerically zero");
      }
      d.dS_dx[j] = m * w / s * (x[j] * c - x0[j]);
      d.dS_dx0[j] = m * w / s * (x0[j] * c - x[j]);
      d.d2S_dx_dx0[j] = -m * w / s;
      d.dS_dt += -0.5 * m * w * w / (s * s) * (x[j] * x[j] + x0[j] * x0[j] - 2.0 * x[j] * x0[j] * c);
    } else {
      const double dx = x[j] - x0[j];
      d.dS_dx[j] = m * dx / t;
      d.dS_dx0[j] = -m * dx / t;
      d.d2S_dx_dx0[j] = -m / t;
      d.dS_dt += -0.5 * m * dx * dx / (t * t);
    }
  }
  return d;
}

ActionValue exact_action(const PotentialSpec& spec, std::span<const double> x,
                         std::span<const double> x0, double t, const SystemConfig& cfg) {
  require_closed_form(spec, "exact_action");
  require_same_size(x, x0, cfg, "exact_action");
  if (spec.dimension() != cfg.dof()) {
    throw Error("action", "exact_action", "potential dimension must equal dof");
  }
  if (t == 0.0) throw Error("action", "exact_action", "elapsed time must be non-zero");
  double s_total = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double m = cfg.mass(j);
    if (is_harmonic(spec)) {
      const double w = effective_frequency(spec, cfg, j);
      const double s = std::sin(w * t);
      if (std::abs(s) < kCausticGuard) {
        throw Error("action", "exact_action", "caustic: sin(omega t) is numerically zero");
      }
      s_total += m * w / (2.0 * s) * ((x[j] * x[j] + x0[j] * x0[j]) * std::cos(w * t) - 2.0 * x[j] * x0[j]);
    } else {
      const double dx = x[j] - x0[j];
      s_total += 0.5 * m * dx * dx / t;
    }
  }
  return {s_total, ActionMethod::Exact};
}

ActionValue exact_action(const PotentialSpec& spec, double x, double x0, double t,
                         const SystemConfig& cfg) {
  return exact_action(spec, std::span<const double>(&x, 1), std::span<const double>(&x0, 1), t, cfg);
}

ShootingResult action_by_shooting(const PotentialSpec& spec, std::span<const double> x,
                                  std::span<const double> x0, double t, double t0,
                                  const SystemConfig& cfg, const ShootingOptions& opts) {
  require_same_size(x, x0, cfg, "action_by_shooting");
  const double dt = t - t0;
  if (dt == 0.0) throw Error("action", "action_by_shooting", "t must differ from t0");
  if (opts.steps < 2) throw Error("action", "action_by_shooting", "need >= 2 integration steps");
  const std::size_t n = x.size();

  // Caustic proximity: curvature sampled along the straight segment.
  double kappa = 0.0;
  for (int k = 0; k <= 8; ++k) {
    const double tau = k / 8.0;
    std::vector<double> y(n);
    for (std::size_t j = 0; j < n; ++j) y[j] = tau * x[j] + (1.0 - tau) * x0[j];
    const auto c = curvature_potential(spec, y);
    for (std::size_t j = 0; j < n; ++j) kappa = std::max(kappa, std::abs(c[j]) / cfg.mass(j));
  }
  if (std::abs(dt) * std::sqrt(kappa) >= opts.curvature_limit) {
    throw Error("action", "action_by_shooting",
                "time step too long for a unique classical path (caustic proximity)");
  }

  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = cfg.mass(j) * (x[j] - x0[j]) / dt;

  auto residual_of = [&](const std::vector<double>& end) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) r[static_cast<Eigen::Index>(j)] = end[j] - x[j];
    return r;
  };

  double scale = 1.0;
  for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(x[j]));

  Eigen::VectorXd r = residual_of(shoot_endpoint(spec, cfg, x0, p, dt, opts.steps));
  std::size_t it = 0;
  while (r.lpNorm<Eigen::Infinity>() > opts.tolerance * scale) {
    if (it == opts.max_iterations) {
      throw Error("action", "action_by_shooting",
                  "shooting did not converge; final residual " + std::to_string(r.lpNorm<Eigen::Infinity>()));
    }
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      auto pp = p;
      const double h = 1e-7 * std::max(1.0, std::abs(p[k]));
      pp[k] += h;
      auto pm = p;
      pm[k] -= h;
      const Eigen::VectorXd col = (residual_of(shoot_endpoint(spec, cfg, x0, pp, dt, opts.steps)) -
                                   residual_of(shoot_endpoint(spec, cfg, x0, pm, dt, opts.steps))) /
                                  (2.0 * h);
      jac.col(static_cast<Eigen::Index>(k)) = col;
    }
    const Eigen::VectorXd delta = jac.fullPivLu().solve(r);
    if (!delta.allFinite()) {
      throw Error("action", "action_by_shooting", "singular shooting Jacobian (caustic)");
    }
    for (std::size_t j = 0; j < n; ++j) p[j] -= delta[static_cast<Eigen::Index>(j)];
    r = residual_of(shoot_endpoint(spec, cfg, x0, p, dt, opts.steps));
    ++it;
  }

  ShootingResult out;
  out.initial_momentum = p;
  out.iterations = it;
  out.residual = r.lpNorm<Eigen::Infinity>();
  out.trajectory.reserve(opts.steps + 1);
  Phase z{std::vector<double>(x0.begin(), x0.end()), p};
  const double h = dt / static_cast<double>(opts.steps);
  auto lagrangian = [&](const Phase& s) {
    double kin = 0.0;
    for (std::size_t j = 0; j < n; ++j) kin += 0.5 * s.p[j] * s.p[j] / cfg.mass(j);
    return kin - eval_potential(spec, s.x);
  };
  double integral = 0.5 * lagrangian(z);
  out.trajectory.push_back({t0, z.x, z.p});
  for (std::size_t k = 1; k <= opts.steps; ++k) {
    z = rk4_step(spec, cfg, z, h);
    out.trajectory.push_back({t0 + static_cast<double>(k) * h, z.x, z.p});
    integral += (k == opts.steps ? 0.5 : 1.0) * lagrangian(z);
  }
  out.action = integral * h;
  return out;
}

}  // namespace qtraj
