#include "qtraj/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qtraj {
namespace {

using std::numbers::pi;

constexpr std::size_t kEdge = kBoundaryStencilWidth;

template <typename T>
T d1_five(const std::vector<T>& f, std::size_t i, double dx) {
  return (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * dx);
}

template <typename T>
T d2_five(const std::vector<T>& f, std::size_t i, double dx) {
  return (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / (12.0 * dx * dx);
}

void require_1d(const SystemConfig& cfg, const char* op) {
  if (cfg.dof() != 1) throw Error("bohm", op, "grid fields need dof = 1");
}

std::vector<bool> stencil_valid(const std::vector<bool>& node, std::size_t m) {
  std::vector<bool> ok(m, false);
  for (std::size_t i = kEdge; i + kEdge < m; ++i) {
    bool clear = true;
    for (std::size_t k = i - kEdge; k <= i + kEdge; ++k) clear = clear && !node[k];
    ok[i] = clear;
  }
  return ok;
}

}  // namespace

PolarFields polar_decompose(const ComplexField& psi, const SystemConfig& cfg, double eps_node) {
  if (!all_finite(psi.values)) throw Error("bohm", "polar_decompose", "wavefunction is not finite");
  const std::size_t m = psi.size();
  PolarFields out{psi.grid, std::vector<double>(m), std::vector<double>(m), std::vector<bool>(m)};
  std::size_t peak = 0;
  for (std::size_t i = 0; i < m; ++i) {
    out.rho[i] = std::norm(psi.values[i]);
    if (out.rho[i] > out.rho[peak]) peak = i;
  }
  const double floor = eps_node * out.rho[peak];
  if (out.rho[peak] == 0.0) throw Error("bohm", "polar_decompose", "entire field is below the node threshold");
  for (std::size_t i = 0; i < m; ++i) out.node_mask[i] = out.rho[i] < floor;

  std::vector<double> phase(m);
  phase[peak] = std::arg(psi.values[peak]);
  auto follow = [&](std::size_t i, std::size_t prev) {
    const double raw = std::arg(psi.values[i]);
    phase[i] = raw + 2.0 * pi * std::round((phase[prev] - raw) / (2.0 * pi));
  };
  for (std::size_t i = peak + 1; i < m; ++i) follow(i, i - 1);
  for (std::size_t i = peak; i-- > 0;) follow(i, i + 1);
  for (std::size_t i = 0; i < m; ++i) out.S[i] = cfg.hbar * phase[i];
  return out;
}

double reconstruction_error(const PolarFields& fields, const ComplexField& psi, const SystemConfig& cfg) {
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    scale = std::max(scale, std::abs(psi.values[i]));
    if (fields.node_mask[i]) continue;
    const cplx rebuilt = std::polar(std::sqrt(fields.rho[i]), fields.S[i] / cfg.hbar);
    worst = std::max(worst, std::abs(rebuilt - psi.values[i]));
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

QuantumPotentialField quantum_potential(const PolarFields& fields, const SystemConfig& cfg) {
  require_1d(cfg, "quantum_potential");
  const std::size_t m = fields.rho.size();
  const double dx = fields.grid.dx();
  const double k = cfg.hbar * cfg.hbar / (2.0 * cfg.mass(0));
  QuantumPotentialField out{fields.grid, std::vector<double>(m, 0.0), std::vector<double>(m, 0.0),
                            stencil_valid(fields.node_mask, m)};
  if (std::none_of(out.valid_mask.begin(), out.valid_mask.end(), [](bool b) { return b; })) {
    throw Error("bohm", "quantum_potential", "every grid point is masked");
  }
  std::vector<double> amp(m);
  for (std::size_t i = 0; i < m; ++i) amp[i] = std::sqrt(fields.rho[i]);
  const auto& rho = fields.rho;
  for (std::size_t i = kEdge; i + kEdge < m; ++i) {
    if (amp[i] == 0.0) continue;
    out.Q[i] = -k * d2_five(amp, i, dx) / amp[i];
    const double r1 = d1_five(rho, i, dx) / rho[i];
    const double r2 = d2_five(rho, i, dx) / rho[i];
    out.Q_from_rho[i] = -0.5 * k * (r2 - 0.5 * r1 * r1);
  }
  // Outermost points copy their neighbours so interpolation stays bounded.
  for (std::size_t i = 0; i < kEdge; ++i) {
    out.Q[i] = out.Q[kEdge];
    out.Q[m - 1 - i] = out.Q[m - 1 - kEdge];
    out.Q_from_rho[i] = out.Q_from_rho[kEdge];
    out.Q_from_rho[m - 1 - i] = out.Q_from_rho[m - 1 - kEdge];
  }
  return out;
}

double quantum_potential_form_gap(const QuantumPotentialField& q) {
  double gap = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < q.Q.size(); ++i) {
    if (!q.valid_mask[i]) continue;
    gap = std::max(gap, std::abs(q.Q[i] - q.Q_from_rho[i]));
    scale = std::max(scale, std::abs(q.Q[i]));
  }
  return scale > 0.0 ? gap / scale : gap;
}

VelocityField velocity_field(const ComplexField& psi, const SystemConfig& cfg, double eps_node) {
  require_1d(cfg, "velocity_field");
  if (!all_finite(psi.values)) throw Error("bohm", "velocity_field", "wavefunction is not finite");
  const std::size_t m = psi.size();
  const double dx = psi.grid.dx();
  double peak = 0.0;
  for (const auto& z : psi.values) peak = std::max(peak, std::norm(z));
  std::vector<bool> node(m);
  for (std::size_t i = 0; i < m; ++i) node[i] = std::norm(psi.values[i]) < eps_node * peak;

  VelocityField out{psi.grid, std::vector<double>(m, 0.0), std::vector<bool>(m, false)};
  const auto coarse = finite_difference<cplx>(psi.values, dx, 1);
  const double scale = cfg.hbar / cfg.mass(0);
  for (std::size_t i = 0; i < m; ++i) {
    const cplx z = psi.values[i];
    if (z == 0.0) continue;
    const cplx d = (i >= kEdge && i + kEdge < m) ? d1_five(psi.values, i, dx) : coarse[i];
    out.v[i] = scale * (d / z).imag();
    out.valid_mask[i] = !node[i] && i >= kEdge && i + kEdge < m;
  }
  if (std::none_of(out.valid_mask.begin(), out.valid_mask.end(), [](bool b) { return b; })) {
    throw Error("bohm", "velocity_field", "every grid point is masked");
  }
  return out;
}

ContinuityResidual continuity_residual(const ComplexField& psi_t0, const ComplexField& psi_t1, double dt,
                                       const SystemConfig& cfg) {
  require_1d(cfg, "continuity_residual");
  if (!(psi_t0.grid == psi_t1.grid)) throw Error("bohm", "continuity_residual", "snapshot grids differ");
  if (!(dt > 0.0)) throw Error("bohm", "continuity_residual", "dt must be > 0");
  const std::size_t m = psi_t0.size();
  const double dx = psi_t0.grid.dx();
  const double scale = cfg.hbar / cfg.mass(0);
  auto current = [&](const ComplexField& f) {
    const auto d = finite_difference<cplx>(f.values, dx, 1);
    std::vector<double> j(m);
    for (std::size_t i = 0; i < m; ++i) j[i] = scale * (std::conj(f.values[i]) * d[i]).imag();
    return j;
  };
  const auto j0 = current(psi_t0);
  const auto j1 = current(psi_t1);
  std::vector<double> j(m);
  double rho_max = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    j[i] = 0.5 * (j0[i] + j1[i]);
    rho_max = std::max({rho_max, std::norm(psi_t0.values[i]), std::norm(psi_t1.values[i])});
  }
  if (rho_max == 0.0) throw Error("bohm", "continuity_residual", "density vanishes everywhere");

  ContinuityResidual out{std::vector<double>(m, 0.0), 0.0};
  double worst = 0.0, drho_max = 0.0, div_max = 0.0;
  for (std::size_t i = kEdge; i + kEdge < m; ++i) {
    const double drho = (std::norm(psi_t1.values[i]) - std::norm(psi_t0.values[i])) / dt;
    const double div = (j[i + 1] - j[i - 1]) / (2.0 * dx);
    out.residual[i] = drho + div;
    worst = std::max(worst, std::abs(out.residual[i]));
    drho_max = std::max(drho_max, std::abs(drho));
    div_max = std::max(div_max, std::abs(div));
  }
  const double length = psi_t0.grid.length();
  const double floor = scale * rho_max / (length * length);
  out.relative = worst / std::max({drho_max, div_max, floor});
  return out;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Completed:
      return "completed";
    case Termination::Node:
      return "node";
    case Termination::Boundary:
      return "boundary";
  }
  return "unknown";
}

namespace {

class GuidanceField {
 public:
  GuidanceField(const Evolution& ev, const SystemConfig& cfg, double eps_node) : grid_(ev.fields.front().grid) {
    const std::size_t n = ev.fields.size();
    t0_ = ev.times.front();
    ds_ = (ev.times.back() - t0_) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
      if (!(ev.fields[k].grid == grid_)) {
        throw Error("bohm", "integrate_bohm_trajectory", "snapshot grids differ");
      }
      const double expect = t0_ + static_cast<double>(k) * ds_;
      if (std::abs(ev.times[k] - expect) > 1e-9 * std::max(1.0, std::abs(ds_) * static_cast<double>(n))) {
        throw Error("bohm", "integrate_bohm_trajectory", "snapshots must be uniformly spaced in time");
      }
      velocity_.push_back(velocity_field(ev.fields[k], cfg, eps_node));
      q_.push_back(quantum_potential(polar_decompose(ev.fields[k], cfg, eps_node), cfg).Q);
    }
  }

  double step() const { return ds_; }
  std::size_t snapshots() const { return velocity_.size(); }
  double time(std::size_t k) const { return t0_ + static_cast<double>(k) * ds_; }

  /// Returns false and sets `why` when x is unusable at time t.
  bool velocity(double x, double t, double& v, Termination& why) const {
    return sample(x, t, v, why, [this](std::size_t k) -> std::span<const double> { return velocity_[k].v; });
  }

  double quantum_potential_at(double x, double t) const {
    double q = 0.0;
    Termination why{};
    sample(x, t, q, why, [this](std::size_t k) -> std::span<const double> { return q_[k]; });
    return q;
  }

 private:
  template <typename Get>
  bool sample(double x, double t, double& out, Termination& why, Get&& get) const {
    const std::size_t m = grid_.size();
    const double lo = grid_.x(kEdge), hi = grid_.x(m - 1 - kEdge);
    if (!(x >= lo && x <= hi)) {
      why = Termination::Boundary;
      return false;
    }
    const double s = (t - t0_) / ds_;
    std::size_t k = static_cast<std::size_t>(std::max(0.0, std::floor(s + 1e-9)));
    if (k >= snapshots() - 1) k = snapshots() - 2;
    const double w = std::clamp(s - static_cast<double>(k), 0.0, 1.0);
    const std::size_t cell = std::min(static_cast<std::size_t>((x - grid_.x_min()) / grid_.dx()), m - 2);
    for (std::size_t kk : {k, k + 1}) {
      if ((kk == k && w == 1.0) || (kk == k + 1 && w == 0.0)) continue;
      const auto& valid = velocity_[kk].valid_mask;
      if (!valid[cell] || !valid[cell + 1]) {
        why = Termination::Node;
        return false;
      }
    }
    const double a = cubic_interpolate<double>(get(k), grid_.x_min(), grid_.dx(), x);
    const double b = w > 0.0 ? cubic_interpolate<double>(get(k + 1), grid_.x_min(), grid_.dx(), x) : 0.0;
    out = (1.0 - w) * a + w * b;
    return true;
  }

  SpatialGrid grid_;
  double t0_ = 0.0;
  double ds_ = 0.0;
  std::vector<VelocityField> velocity_;
  std::vector<std::vector<double>> q_;
};

}  // namespace

BohmTrajectory integrate_bohm_trajectory(const Evolution& evolution, double x0, const SystemConfig& cfg,
                                         double eps_node) {
  require_1d(cfg, "integrate_bohm_trajectory");
  if (evolution.fields.size() < 2 || evolution.fields.size() != evolution.times.size()) {
    throw Error("bohm", "integrate_bohm_trajectory", "need at least two snapshots with matching times");
  }
  const GuidanceField field(evolution, cfg, eps_node);
  const double m = cfg.mass(0);
  BohmTrajectory traj;

  double v = 0.0;
  Termination why{};
  if (!field.velocity(x0, field.time(0), v, why)) {
    throw Error("bohm", "integrate_bohm_trajectory", "x0 lies on a node or outside the usable grid");
  }
  traj.samples.push_back({field.time(0), x0, m * v, field.quantum_potential_at(x0, field.time(0))});

  double x = x0;
  std::size_t k = 0;
  const std::size_t last = field.snapshots() - 1;
  while (k < last) {
    const std::size_t span = (k + 2 <= last) ? 2 : 1;
    const double t = field.time(k);
    const double t1 = field.time(k + span);
    const double h = t1 - t;
    double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0;
    const bool ok = field.velocity(x, t, k1, why) && field.velocity(x + 0.5 * h * k1, t + 0.5 * h, k2, why) &&
                    field.velocity(x + 0.5 * h * k2, t + 0.5 * h, k3, why) &&
                    field.velocity(x + h * k3, t1, k4, why);
    if (!ok) {
      traj.termination = why;
      return traj;
    }
    const double xn = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!field.velocity(xn, t1, v, why)) {
      traj.termination = why;
      return traj;
    }
    x = xn;
    k += span;
    traj.samples.push_back({t1, x, m * v, field.quantum_potential_at(x, t1)});
  }
  traj.termination = Termination::Completed;
  return traj;
}

QuantumPotentialDrift quantum_potential_drift(const BohmTrajectory& traj, std::span<const double> dts) {
  if (traj.samples.empty()) throw Error("bohm", "quantum_potential_drift", "trajectory has no samples");
  const auto& first = traj.samples.front();
  QuantumPotentialDrift out;
  auto drift_at = [&](const BohmSample& s) {
    const double d = std::abs(s.Q - first.Q);
    return d <= 1e-12 * std::abs(first.Q) ? 0.0 : d;
  };
  if (dts.empty()) {
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
      out.samples.push_back({traj.samples[i].t - first.t, drift_at(traj.samples[i])});
    }
  } else {
    for (double dt : dts) {
      const auto it = std::find_if(traj.samples.begin(), traj.samples.end(), [&](const BohmSample& s) {
        return std::abs(s.t - first.t - dt) <= 1e-9 * std::max(1.0, std::abs(dt));
      });
      if (it == traj.samples.end()) {
        throw Error("bohm", "quantum_potential_drift", "no trajectory sample at t0 + " + std::to_string(dt));
      }
      out.samples.push_back({dt, drift_at(*it)});
    }
  }
  if (out.samples.size() < 3) throw Error("bohm", "quantum_potential_drift", "fewer than 3 usable samples");
  out.order = fit_convergence_order(out.samples);
  return out;
}

}  // namespace qtraj
