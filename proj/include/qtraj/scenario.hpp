#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/gaussian.hpp"
#include "qtraj/numerics.hpp"
#include "qtraj/potentials.hpp"

namespace qtraj {

enum class Task { Propagate, Bohm, Convergence, Zeno, Mott };
std::string to_string(Task t);
std::optional<Task> task_from_string(const std::string& s);

struct InitialState {
  /// Used unless `samples` is set.
  std::optional<GaussianParams> gaussian;
  /// Complex samples read from `file` (one "re,im" line per grid point).
  std::optional<std::vector<cplx>> samples;
  std::string file;
};

struct GridConfig {
  double x_min = -10.0;
  double x_max = 10.0;
  std::size_t points = 1024;
};

struct TimeConfig {
  double t0 = 0.0;
  double t = 1.0;
  std::size_t steps = 1;
};

struct PropagateOptions {
  /// exact-free | mehler | van-vleck | kerner-sutcliffe | reference
  std::string kernel = "kerner-sutcliffe";
};

struct BohmOptions {
  std::vector<double> x0{0.0};
  /// analytic (thawed Gaussian snapshots) | reference (Crank-Nicolson)
  std::string evolution = "analytic";
  /// Reference steps between consecutive snapshots.
  std::size_t substeps = 1;
};

struct ConvergenceOptions {
  /// kernel | action | wavefunction | time-slicing | theorem1 | theorem2 |
  /// theorem3 | theorem4 | invariants
  std::string study;
  std::string kernel = "kerner-sutcliffe";
  double x = 1.0;
  double x0 = 0.0;
  /// Initial momentum of phase-space studies.
  double p0 = 0.0;
  std::vector<double> dt;
  std::vector<std::size_t> N;
  std::vector<std::size_t> points;
  std::size_t reference_steps = 1000;
  /// Snapshot interval of trajectory studies as a fraction of the smallest dt.
  std::size_t snapshots_per_dt = 10;
};

struct ZenoOptions {
  /// flow | wavefunction
  std::string mode = "flow";
  std::vector<std::size_t> N;
  /// Swept jointly with N (every width against every N).
  std::vector<double> sigma_meas{0.5};
  /// frozen | thawed
  std::string q_evolution = "frozen";
  std::size_t steps_per_segment = 64;
  std::vector<double> z0_x{0.0};
  std::vector<double> z0_p{0.0};
  /// Observation start for the wavefunction mode.
  double x0 = 0.0;
};

struct MottOptions {
  std::size_t N = 64;
  double sigma_meas = 0.5;
  std::size_t steps_per_segment = 64;
  double speed = 1.0;
  double t = 5.0;
  /// Number of emissions; emission k uses seed + k.
  std::size_t emissions = 10;
};

struct ScenarioConfig {
  Task task = Task::Propagate;
  SystemConfig system;
  std::optional<PotentialSpec> potential;
  InitialState initial;
  GridConfig grid;
  TimeConfig time;
  PropagateOptions propagate;
  BohmOptions bohm;
  ConvergenceOptions convergence;
  ZenoOptions zeno;
  MottOptions mott;
  std::uint64_t seed = 0;
  bool seed_given = false;
  /// Raw document, kept for hashing.
  std::string source;

  SpatialGrid spatial_grid() const;
  const PotentialSpec& potential_spec() const;
};

/// Every schema violation found in a document, each as "field.path: constraint".
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Parses and validates a YAML scenario. `base_dir` resolves relative file
/// paths. When `task` is given, the document's own `task` field (if any)
/// must agree with it.
ScenarioConfig parse_config(const std::string& text, const std::string& base_dir = ".",
                            std::optional<Task> task = std::nullopt);
ScenarioConfig load_config(const std::string& path, std::optional<Task> task = std::nullopt);

}  // namespace qtraj
