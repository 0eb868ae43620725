#include "qtraj/propagators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "qtraj/action.hpp"

namespace qtraj {
namespace {

using std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kCausticGuard = 1e-8;

/// (1/(2 pi hbar))^{1/2} |rho|^{1/2} with the branch continued from
/// exp(-i pi / 4) at small positive dt; each caustic crossing adds -pi/2.
cplx branch_amplitude(double abs_density, double hbar, double dt, double angle) {
  const double k = std::floor(std::abs(angle) / pi);
  const double mag = std::sqrt(abs_density / (2.0 * pi * hbar));
  const double phase = -(pi / 4.0 + 0.5 * pi * k);
  return std::polar(mag, dt > 0.0 ? phase : -phase);
}

void check_positions(const KernelSpec& spec, std::span<const double> x, std::span<const double> x0) {
  if (x.size() != spec.cfg.dof() || x0.size() != spec.cfg.dof()) {
    throw Error("propagators", "kernel", "position sizes must equal the system dof");
  }
}

}  // namespace

KernelSpec::KernelSpec(Kind k, SystemConfig c) : kind(std::move(k)), cfg(std::move(c)) {
  cfg.validate();
  std::visit(overloaded{
                 [](const ExactFreeKernel&) {},
                 [](const MehlerKernel& m) {
                   if (!(m.mass > 0.0) || !(m.omega > 0.0)) {
                     throw Error("propagators", "KernelSpec", "Mehler kernel needs mass, omega > 0");
                   }
                 },
                 [this](const VanVleckKernel& v) {
                   if (!v.potential.is_quadratic()) {
                     throw Error("propagators", "KernelSpec",
                                 "Van Vleck kernel is restricted to free and harmonic potentials");
                   }
                   if (v.potential.dimension() != cfg.dof()) {
                     throw Error("propagators", "KernelSpec", "potential dimension must equal dof");
                   }
                 },
                 [this](const KernerSutcliffeKernel& k) {
                   if (k.averaged.base().dimension() != cfg.dof()) {
                     throw Error("propagators", "KernelSpec", "potential dimension must equal dof");
                   }
                 },
             },
             kind);
}

std::string KernelSpec::name() const {
  return std::visit(overloaded{
                        [](const ExactFreeKernel&) { return std::string("exact-free"); },
                        [](const MehlerKernel&) { return std::string("mehler"); },
                        [](const VanVleckKernel&) { return std::string("van-vleck"); },
                        [](const KernerSutcliffeKernel&) { return std::string("kerner-sutcliffe"); },
                    },
                    kind);
}

KernelParts kernel_parts(const KernelSpec& spec, std::span<const double> x,
                         std::span<const double> x0, double t, double t0) {
  check_positions(spec, x, x0);
  const double dt = t - t0;
  if (dt == 0.0) throw Error("propagators", "kernel", "t must differ from t0");
  const auto& cfg = spec.cfg;
  const double hbar = cfg.hbar;
  const std::size_t n = cfg.dof();

  return std::visit(
      overloaded{
          [&](const ExactFreeKernel&) {
            KernelParts k{1.0, 0.0};
            for (std::size_t j = 0; j < n; ++j) {
              const double m = cfg.mass(j);
              const double d = x[j] - x0[j];
              k.amplitude *= std::sqrt(cplx(m / (2.0 * pi * hbar * dt), 0.0) / cplx(0.0, 1.0));
              k.phase += 0.5 * m * d * d / (hbar * dt);
            }
            return k;
          },
          [&](const MehlerKernel& mk) {
            KernelParts k{1.0, 0.0};
            const double m = mk.mass, w = mk.omega;
            const double s = std::sin(w * dt), c = std::cos(w * dt);
            if (std::abs(s) < kCausticGuard) {
              throw Error("propagators", "kernel", "caustic: sin(omega dt) is numerically zero");
            }
            for (std::size_t j = 0; j < n; ++j) {
              k.amplitude *= branch_amplitude(std::abs(m * w / s), hbar, dt, w * dt);
              k.phase += m * w * ((x[j] * x[j] + x0[j] * x0[j]) * c - 2.0 * x[j] * x0[j]) / (2.0 * hbar * s);
            }
            return k;
          },
          [&](const VanVleckKernel& vv) {
            const auto partials = exact_action_partials(vv.potential, x, x0, dt, cfg);
            KernelParts k{1.0, exact_action(vv.potential, x, x0, dt, cfg).value / hbar};
            for (std::size_t j = 0; j < n; ++j) {
              const double density = -partials.d2S_dx_dx0[j];
              const double w = effective_frequency(vv.potential, cfg, j);
              k.amplitude *= branch_amplitude(std::abs(density), hbar, dt, w * dt);
            }
            return k;
          },
          [&](const KernerSutcliffeKernel& ks) {
            KernelParts k{1.0, short_time_action(ks.averaged, x, x0, t, t0, cfg).value / hbar};
            for (std::size_t j = 0; j < n; ++j) {
              k.amplitude *= std::sqrt(cplx(cfg.mass(j) / (2.0 * pi * hbar * dt), 0.0) / cplx(0.0, 1.0));
            }
            return k;
          },
      },
      spec.kind);
}

cplx kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> x0, double t,
            double t0) {
  return kernel_parts(spec, x, x0, t, t0).value();
}

cplx kernel(const KernelSpec& spec, double x, double x0, double t, double t0) {
  return kernel(spec, std::span<const double>(&x, 1), std::span<const double>(&x0, 1), t, t0);
}

ComplexField apply_kernel(const KernelSpec& spec, const ComplexField& psi0, double t, double t0,
                          const ApplyOptions& opts) {
  if (spec.cfg.dof() != 1) {
    throw Error("propagators", "apply_kernel", "grid application needs dof = 1");
  }
  const auto& grid = psi0.grid;
  const std::size_t m = grid.size();
  double peak = 0.0;
  for (const auto& v : psi0.values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return ComplexField(grid, std::vector<cplx>(m));

  std::size_t lo = m, hi = 0;
  for (std::size_t k = 0; k < m; ++k) {
    if (std::abs(psi0.values[k]) > opts.support_threshold * peak) {
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  }

  // Amplitude depends on dt only for every supported kernel kind.
  const double xa = grid.x(lo);
  const cplx amplitude = kernel_parts(spec, std::span<const double>(&xa, 1),
                                      std::span<const double>(&xa, 1), t, t0)
                             .amplitude;
  auto phase = [&](double x, double x0) {
    return kernel_parts(spec, std::span<const double>(&x, 1), std::span<const double>(&x0, 1), t, t0).phase;
  };
  if (const auto* ks = std::get_if<KernerSutcliffeKernel>(&spec.kind)) {
    // Same expression as short_time_action, without per-call validation.
    const double mass = spec.cfg.mass(0), hbar = spec.cfg.hbar, dt = t - t0;
    const auto& avg = ks->averaged;
    std::vector<double> row(hi - lo + 1);
    std::vector<cplx> out(m);
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = grid.x(i);
      for (std::size_t k = lo; k <= hi; ++k) {
        const double x0 = grid.x(k);
        const double d = x - x0;
        row[k - lo] = (0.5 * mass * d * d / dt - averaged_potential(avg, x, x0) * dt) / hbar;
      }
      cplx sum = 0.0;
      for (std::size_t k = lo; k <= hi; ++k) {
        const double w = (k == 0 || k == m - 1) ? 0.5 : 1.0;
        sum += w * psi0.values[k] * std::polar(1.0, row[k - lo]);
        if (i >= lo && i <= hi && k < hi) worst = std::max(worst, std::abs(row[k + 1 - lo] - row[k - lo]));
      }
      out[i] = amplitude * sum * grid.dx();
    }
    if (worst >= pi) {
      std::ostringstream msg;
      msg << "kernel oscillation under-resolved: phase step " << worst
          << " rad between grid points; smallest admissible |t - t0| for this grid is about "
          << std::abs(t - t0) * worst / pi;
      throw Error("propagators", "apply_kernel", msg.str());
    }
    return ComplexField(grid, std::move(out));
  }

  std::vector<double> row(hi - lo + 1);
  std::vector<cplx> out(m);
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = grid.x(i);
    for (std::size_t k = lo; k <= hi; ++k) row[k - lo] = phase(x, grid.x(k));
    cplx sum = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) {
      const double w = (k == 0 || k == m - 1) ? 0.5 : 1.0;
      sum += w * psi0.values[k] * std::polar(1.0, row[k - lo]);
      if (i >= lo && i <= hi && k < hi) worst = std::max(worst, std::abs(row[k + 1 - lo] - row[k - lo]));
    }
    out[i] = amplitude * sum * grid.dx();
  }
  if (worst >= pi) {
    std::ostringstream msg;
    msg << "kernel oscillation under-resolved: phase step " << worst
        << " rad between grid points; smallest admissible |t - t0| for this grid is about "
        << std::abs(t - t0) * worst / pi;
    throw Error("propagators", "apply_kernel", msg.str());
  }
  return ComplexField(grid, std::move(out));
}

SlicedEvolution time_slice_evolve(const KernelSpec& spec, const ComplexField& psi0,
                                  const TimeWindow& window, const SliceOptions& opts) {
  SlicedEvolution result{psi0, {}};
  result.slice_norm_drift.reserve(window.steps());
  double norm = l2_norm(psi0);
  for (std::size_t j = 0; j < window.steps(); ++j) {
    result.psi = apply_kernel(spec, result.psi, window.time(j + 1), window.time(j), opts.apply);
    const double next = l2_norm(result.psi);
    const double drift = norm > 0.0 ? std::abs(next - norm) / norm : 0.0;
    result.slice_norm_drift.push_back(drift);
    if (drift > opts.max_norm_drift) {
      throw Error("propagators", "time_slice_evolve",
                  "slice " + std::to_string(j) + " changed the norm by " + std::to_string(drift) +
                      " (under-resolved)");
    }
    norm = next;
  }
  return result;
}

double energy_expectation(const PotentialSpec& spec, const ComplexField& psi, const SystemConfig& cfg) {
  const auto& g = psi.grid;
  const std::size_t m = g.size();
  const double kin = cfg.hbar * cfg.hbar / (2.0 * cfg.mass(0));
  const double inv = 1.0 / (12.0 * g.dx() * g.dx());
  const auto& f = psi.values;
  cplx e = 0.0;
  double n = 0.0;
  for (std::size_t i = 2; i + 2 < m; ++i) {
    const cplx lap = (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) * inv;
    e += std::conj(f[i]) * (-kin * lap + eval_potential(spec, g.x(i)) * f[i]);
    n += std::norm(f[i]);
  }
  return n > 0.0 ? e.real() / n : 0.0;
}

double boundary_mass_fraction(const ComplexField& psi, std::size_t width) {
  double total = 0.0, edge = 0.0;
  const std::size_t m = psi.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double r = std::norm(psi.values[i]);
    total += r;
    if (i < width || i + width >= m) edge += r;
  }
  return total > 0.0 ? edge / total : 0.0;
}

namespace {

class CrankNicolson {
 public:
  CrankNicolson(const PotentialSpec& spec, const SpatialGrid& grid, const SystemConfig& cfg, double dt)
      : n_(grid.size() - 2), lower_(n_), diag_(n_), upper_(n_), off_(), dself_(n_) {
    const double hbar = cfg.hbar;
    const double kin = hbar * hbar / (2.0 * cfg.mass(0) * grid.dx() * grid.dx());
    const cplx f(0.0, 0.5 * dt / hbar);
    off_ = f * (-kin);
    for (std::size_t i = 0; i < n_; ++i) {
      const double h_ii = 2.0 * kin + eval_potential(spec, grid.x(i + 1));
      dself_[i] = f * h_ii;
      diag_[i] = 1.0 + dself_[i];
      lower_[i] = off_;
      upper_[i] = off_;
    }
  }

  void step(std::vector<cplx>& psi) const {
    std::vector<cplx> rhs(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const cplx left = psi[i];
      const cplx mid = psi[i + 1];
      const cplx right = psi[i + 2];
      rhs[i] = (1.0 - dself_[i]) * mid - off_ * (left + right);
    }
    // Walls: first and last samples stay zero.
    solve_tridiagonal(lower_, diag_, upper_, rhs);
    psi.front() = 0.0;
    psi.back() = 0.0;
    for (std::size_t i = 0; i < n_; ++i) psi[i + 1] = rhs[i];
  }

 private:
  std::size_t n_;
  std::vector<cplx> lower_, diag_, upper_;
  cplx off_;
  std::vector<cplx> dself_;
};

void check_reference_inputs(const PotentialSpec& spec, const SystemConfig& cfg, const char* op) {
  if (cfg.dof() != 1 || spec.dimension() != 1) {
    throw Error("propagators", op, "reference evolution needs dof = 1");
  }
}

void check_energy(double e0, double e1, const ComplexField& psi, const SystemConfig& cfg,
                  const ReferenceOptions& opts, const char* op) {
  const double scale = std::max(std::abs(e0), cfg.hbar * cfg.hbar /
                                                  (cfg.mass(0) * psi.grid.length() * psi.grid.length()));
  if (!std::isfinite(e1) || std::abs(e1 - e0) > opts.max_energy_drift * scale) {
    throw Error("propagators", op,
                "energy drift " + std::to_string(std::abs(e1 - e0) / scale) + " exceeds bound: grid too coarse");
  }
}

void check_walls(const ComplexField& psi, const ReferenceOptions& opts, const char* op) {
  const double edge = boundary_mass_fraction(psi, opts.boundary_width);
  if (edge > opts.max_boundary_mass) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", edge);
    throw Error("propagators", op, std::string("probability ") + buf + " reached the grid walls: extend the grid");
  }
}

}  // namespace

ComplexField reference_evolve(const PotentialSpec& spec, const ComplexField& psi0,
                              const TimeWindow& window, const SystemConfig& cfg,
                              const ReferenceOptions& opts) {
  check_reference_inputs(spec, cfg, "reference_evolve");
  const CrankNicolson cn(spec, psi0.grid, cfg, window.step());
  std::vector<cplx> psi = psi0.values;
  for (std::size_t j = 0; j < window.steps(); ++j) cn.step(psi);
  ComplexField out(psi0.grid, std::move(psi));
  check_walls(out, opts, "reference_evolve");
  check_energy(energy_expectation(spec, psi0, cfg), energy_expectation(spec, out, cfg), out, cfg, opts,
               "reference_evolve");
  return out;
}

std::vector<ComplexField> reference_evolve_snapshots(const PotentialSpec& spec,
                                                     const ComplexField& psi0,
                                                     const TimeWindow& window,
                                                     const SystemConfig& cfg, std::size_t substeps,
                                                     const ReferenceOptions& opts) {
  check_reference_inputs(spec, cfg, "reference_evolve");
  if (substeps < 1) throw Error("propagators", "reference_evolve", "substeps must be >= 1");
  const CrankNicolson cn(spec, psi0.grid, cfg, window.step() / static_cast<double>(substeps));
  std::vector<ComplexField> out;
  out.reserve(window.steps() + 1);
  out.push_back(psi0);
  std::vector<cplx> psi = psi0.values;
  for (std::size_t j = 0; j < window.steps(); ++j) {
    for (std::size_t s = 0; s < substeps; ++s) cn.step(psi);
    out.emplace_back(psi0.grid, psi);
    check_walls(out.back(), opts, "reference_evolve");
  }
  check_energy(energy_expectation(spec, psi0, cfg), energy_expectation(spec, out.back(), cfg), out.back(),
               cfg, opts, "reference_evolve");
  return out;
}

}  // namespace qtraj
