#pragma once

#include <string>

#include "qtraj/results.hpp"
#include "qtraj/scenario.hpp"

namespace qtraj {

// Output columns per task:
//   propagate    x, re, im, rho                      (final wavefunction)
//   bohm         trajectory, t, x, p, Q, termination
//   convergence  series, step, error, fitted_order   (one summary row per
//                series with step and error empty)
//   zeno         N, endpoint_x, endpoint_p, classical_error, sigma_meas
//   mott         emission, seed, direction, straightness

struct ScenarioResult {
  ResultTable table;
  /// Convergence study name, empty for other tasks.
  std::string study;
};

/// Deterministic for a given config (and seed).
ScenarioResult run_scenario(const ScenarioConfig& cfg);

}  // namespace qtraj
