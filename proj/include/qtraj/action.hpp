#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qtraj/numerics.hpp"
#include "qtraj/potentials.hpp"

namespace qtraj {

enum class ActionMethod { Exact, Shooting, ShortTime };

struct ActionValue {
  double value = 0.0;
  ActionMethod method = ActionMethod::ShortTime;
};

/// Leading terms of the small-time expansion S = S0 / dt + S1 dt + ...
/// S0 is the free generating function, S1 = -Vbar.
double free_generating_function(std::span<const double> x, std::span<const double> x0,
                                const SystemConfig& cfg);
double first_order_action_term(const AveragedPotential& avg, std::span<const double> x,
                               std::span<const double> x0);

/// sum_j m_j (x_j - x0_j)^2 / (2 dt) - Vbar(x, x0) dt with dt = t - t0.
ActionValue short_time_action(const AveragedPotential& avg, std::span<const double> x,
                              std::span<const double> x0, double t, double t0,
                              const SystemConfig& cfg);
ActionValue short_time_action(const AveragedPotential& avg, double x, double x0, double t,
                              double t0, const SystemConfig& cfg);

/// Closed-form action for free and harmonic potentials over elapsed time t.
/// Harmonic coordinates use the effective frequency omega sqrt(mass / m_j)
/// implied by the kinetic mass m_j. Refuses |sin(Omega t)| < 1e-8.
ActionValue exact_action(const PotentialSpec& spec, std::span<const double> x,
                         std::span<const double> x0, double t, const SystemConfig& cfg);
ActionValue exact_action(const PotentialSpec& spec, double x, double x0, double t,
                         const SystemConfig& cfg);

/// Analytic partial derivatives of the closed-form action.
struct ActionPartials {
  double dS_dt = 0.0;
  std::vector<double> dS_dx;
  std::vector<double> dS_dx0;
  /// Diagonal of d^2 S / dx_j dx0_k (the cross Hessian is diagonal here).
  std::vector<double> d2S_dx_dx0;
};
ActionPartials exact_action_partials(const PotentialSpec& spec, std::span<const double> x,
                                     std::span<const double> x0, double t,
                                     const SystemConfig& cfg);

/// Effective angular frequency of coordinate j for a harmonic spec, 0 for free.
double effective_frequency(const PotentialSpec& spec, const SystemConfig& cfg, std::size_t j);

struct TrajectorySample {
  double t;
  std::vector<double> x;
  std::vector<double> p;
};

struct ShootingOptions {
  std::size_t steps = 2000;
  std::size_t max_iterations = 50;
  double tolerance = 1e-12;
  /// Refuse when dt * sqrt(max |V''| / m) reaches this bound (caustic proximity).
  double curvature_limit = 1.5;
};

struct ShootingResult {
  std::vector<double> initial_momentum;
  std::vector<TrajectorySample> trajectory;
  double action = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Solves the two-point boundary problem x(t0) = x0, x(t) = x by Newton
/// shooting on the initial momentum (RK4 trajectories) and integrates the
/// Lagrangian with the trapezoid rule on the trajectory time grid.
ShootingResult action_by_shooting(const PotentialSpec& spec, std::span<const double> x,
                                  std::span<const double> x0, double t, double t0,
                                  const SystemConfig& cfg, const ShootingOptions& opts = {});

}  // namespace qtraj
