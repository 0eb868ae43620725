#include "qtraj/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "qtraj/action.hpp"

namespace qtraj {
namespace {

using std::numbers::pi;

void check_system(const GaussianParams& g, const PotentialSpec& spec, const SystemConfig& cfg,
                  const char* op) {
  g.validate(op);
  if (!spec.is_quadratic()) {
    throw Error("propagators", op, "closed-form Gaussian evolution needs a free or harmonic potential");
  }
  if (g.dof() != cfg.dof() || spec.dimension() != cfg.dof()) {
    throw Error("propagators", op, "Gaussian, potential and system dof must agree");
  }
}

// Argument of u continued from u(0) = 1, given that it stays inside the
// strip [k pi, (k + 1) pi] for theta in the same half period.
double continuous_arg(cplx u, double theta) {
  if (theta == 0.0) return std::arg(u);
  const double lo = std::floor(theta / pi) * pi;
  double a = std::arg(u);
  while (a < lo - 1e-9) a += 2.0 * pi;
  while (a > lo + pi + 1e-9) a -= 2.0 * pi;
  return a;
}

}  // namespace

GaussianParams GaussianParams::normalized(std::vector<double> center, std::vector<double> sigma,
                                          std::vector<double> momentum) {
  if (center.size() != sigma.size() || center.size() != momentum.size() || center.empty()) {
    throw Error("propagators", "GaussianParams", "centre, sigma and momentum sizes must agree");
  }
  GaussianParams g;
  g.center = std::move(center);
  g.momentum = std::move(momentum);
  g.width.resize(sigma.size());
  double log_amp = 0.0;
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (!(sigma[j] > 0.0)) throw Error("propagators", "GaussianParams", "sigma must be > 0");
    g.width[j] = 1.0 / (4.0 * sigma[j] * sigma[j]);
    log_amp += -0.25 * std::log(2.0 * pi * sigma[j] * sigma[j]);
  }
  g.log_prefactor = log_amp;
  return g;
}

GaussianParams GaussianParams::normalized(double center, double sigma, double momentum) {
  return normalized(std::vector<double>{center}, std::vector<double>{sigma},
                    std::vector<double>{momentum});
}

double GaussianParams::sigma(std::size_t j) const { return 0.5 / std::sqrt(width.at(j).real()); }

double GaussianParams::norm() const {
  double log_n = log_prefactor.real();
  for (const auto& a : width) log_n += 0.25 * std::log(pi / (2.0 * a.real()));
  return std::exp(log_n);
}

void GaussianParams::validate(const char* op) const {
  if (center.size() != width.size() || center.size() != momentum.size() || center.empty()) {
    throw Error("propagators", op, "Gaussian parameter sizes must agree");
  }
  for (const auto& a : width) {
    if (!(a.real() > 0.0) || !std::isfinite(a.imag())) {
      throw Error("propagators", op, "Gaussian width must have Re(alpha) > 0");
    }
  }
}

cplx GaussianParams::value(std::span<const double> x, double hbar) const {
  cplx e = log_prefactor;
  for (std::size_t j = 0; j < center.size(); ++j) {
    const double y = x[j] - center[j];
    e += -width[j] * y * y + cplx(0.0, momentum[j] * y / hbar);
  }
  return std::exp(e);
}

cplx GaussianParams::value(double x, double hbar) const {
  return value(std::span<const double>(&x, 1), hbar);
}

ComplexField sample_gaussian(const GaussianParams& g, const SpatialGrid& grid, double hbar) {
  if (g.dof() != 1) throw Error("propagators", "sample_gaussian", "grid sampling needs dof = 1");
  return ComplexField::sample(grid, [&](double x) { return g.value(x, hbar); });
}

GaussianParams gaussian_exact_evolve(const GaussianParams& g, const PotentialSpec& spec, double t,
                                     double t0, const SystemConfig& cfg) {
  check_system(g, spec, cfg, "gaussian_exact_evolve");
  const double tau = t - t0;
  const double hbar = cfg.hbar;
  GaussianParams out = g;
  for (std::size_t j = 0; j < g.dof(); ++j) {
    const double m = cfg.mass(j);
    const double w = effective_frequency(spec, cfg, j);
    const cplx k = 2.0 * hbar * g.width[j] / m;  // u'(0)/i
    cplx u, du;
    double q, p;
    const double q0 = g.center[j], p0 = g.momentum[j];
    if (w > 0.0) {
      const double c = std::cos(w * tau), s = std::sin(w * tau);
      u = c + cplx(0.0, 1.0) * k / w * s;
      du = -w * s + cplx(0.0, 1.0) * k * c;
      q = q0 * c + p0 / (m * w) * s;
      p = p0 * c - m * w * q0 * s;
    } else {
      u = 1.0 + cplx(0.0, 1.0) * k * tau;
      du = cplx(0.0, 1.0) * k;
      q = q0 + p0 / m * tau;
      p = p0;
    }
    out.width[j] = cplx(0.0, -0.5 * m / hbar) * du / u;
    out.center[j] = q;
    out.momentum[j] = p;
    const double theta = w > 0.0 ? w * tau : 0.0;
    const cplx log_u(std::log(std::abs(u)), continuous_arg(u, theta));
    out.log_prefactor += cplx(0.0, 0.5 * (p * q - p0 * q0) / hbar) - 0.5 * log_u;
  }
  return out;
}

GaussianParams gaussian_ks_closed_form(const GaussianParams& g, const PotentialSpec& spec, double t,
                                       double t0, const SystemConfig& cfg) {
  check_system(g, spec, cfg, "gaussian_ks_closed_form");
  const double dt = t - t0;
  if (dt == 0.0) return g;
  const double hbar = cfg.hbar;
  const cplx I(0.0, 1.0);
  double kappa = 0.0;
  if (const auto* h = std::get_if<HarmonicPotential>(&spec.variant())) {
    kappa = h->mass * h->omega * h->omega / 6.0;
  }
  GaussianParams out = g;
  out.log_prefactor = g.log_prefactor;
  for (std::size_t j = 0; j < g.dof(); ++j) {
    const double m = cfg.mass(j);
    const cplx alpha = g.width[j];
    const double a = g.center[j], p = g.momentum[j];
    const double quad = m / (2.0 * dt) - kappa * dt;
    const cplx A = alpha - I * quad / hbar;
    const cplx B0 = 2.0 * alpha * a + I * p / hbar;
    const cplx B1 = I * (-m / dt - kappa * dt) / hbar;
    const cplx C2 = I * quad / hbar;
    const cplx C0 = -alpha * a * a - I * p * a / hbar;
    const cplx E2 = B1 * B1 / (4.0 * A) + C2;
    const cplx E1 = 2.0 * B1 * B0 / (4.0 * A);
    const cplx E0 = B0 * B0 / (4.0 * A) + C0 + 0.5 * std::log(cplx(m / (2.0 * pi * hbar * dt), 0.0) / I) +
                    0.5 * std::log(pi / A);
    const cplx alpha_new = -E2;
    if (!(alpha_new.real() > 0.0)) {
      throw Error("propagators", "gaussian_ks_closed_form", "propagated width lost Re(alpha) > 0");
    }
    const double a_new = E1.real() / (2.0 * alpha_new.real());
    const double p_new = hbar * (E1.imag() - 2.0 * alpha_new.imag() * a_new);
    out.width[j] = alpha_new;
    out.center[j] = a_new;
    out.momentum[j] = p_new;
    out.log_prefactor += E0 + alpha_new * a_new * a_new + I * p_new * a_new / hbar;
  }
  return out;
}

double gaussian_quantum_potential(const GaussianParams& g, std::span<const double> x,
                                  const SystemConfig& cfg) {
  double q = 0.0;
  for (std::size_t j = 0; j < g.dof(); ++j) {
    const double ar = g.width[j].real();
    const double y = x[j] - g.center[j];
    q += cfg.hbar * cfg.hbar * ar / cfg.mass(j) * (1.0 - 2.0 * ar * y * y);
  }
  return q;
}

std::vector<double> gaussian_quantum_force(const GaussianParams& g, std::span<const double> x,
                                           const SystemConfig& cfg) {
  std::vector<double> f(g.dof());
  for (std::size_t j = 0; j < g.dof(); ++j) {
    const double ar = g.width[j].real();
    f[j] = 4.0 * cfg.hbar * cfg.hbar * ar * ar / cfg.mass(j) * (x[j] - g.center[j]);
  }
  return f;
}

std::vector<double> gaussian_velocity(const GaussianParams& g, std::span<const double> x,
                                      const SystemConfig& cfg) {
  std::vector<double> v(g.dof());
  for (std::size_t j = 0; j < g.dof(); ++j) {
    v[j] = (g.momentum[j] - 2.0 * cfg.hbar * g.width[j].imag() * (x[j] - g.center[j])) / cfg.mass(j);
  }
  return v;
}

}  // namespace qtraj
