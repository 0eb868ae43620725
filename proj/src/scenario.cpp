#include "qtraj/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace qtraj {
namespace {

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

class Section {
 public:
  Section(std::vector<std::string>& errors, YAML::Node node, std::string path)
      : errors_(errors), node_(std::move(node)), path_(std::move(path)) {
    // An absent or empty section ("zeno:") reads as all defaults.
    present_ = node_.IsDefined() && !node_.IsNull();
    if (present_ && !node_.IsMap()) {
      fail("", "must be a mapping");
      present_ = false;
    }
  }

  bool present() const { return present_; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return present_ && node_[key];
  }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  void fail(const std::string& key, const std::string& msg) {
    errors_.push_back((key.empty() ? path_ : where(key)) + ": " + msg);
  }
  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    return present_ ? YAML::Node(node_[key]) : YAML::Node();
  }

  double real(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return scalar_real(node_[key], where(key)).value_or(fallback);
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    return scalar_count(node_[key], where(key)).value_or(fallback);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto n = node_[key];
    if (!n.IsScalar()) {
      fail(key, "must be a string");
      return fallback;
    }
    return n.as<std::string>();
  }

  /// Accepts a scalar as a one-element list.
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const auto n = node_[key];
    if (n.IsScalar()) {
      auto v = scalar_real(n, where(key));
      return v ? std::vector<double>{*v} : fallback;
    }
    if (!n.IsSequence()) {
      fail(key, "must be a number or a list of numbers");
      return fallback;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
      auto v = scalar_real(n[i], where(key) + "[" + std::to_string(i) + "]");
      if (v) out.push_back(*v);
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) {
    if (!has(key)) return fallback;
    const auto n = node_[key];
    if (n.IsScalar()) {
      auto v = scalar_count(n, where(key));
      return v ? std::vector<std::size_t>{*v} : fallback;
    }
    if (!n.IsSequence()) {
      fail(key, "must be an integer or a list of integers");
      return fallback;
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
      auto v = scalar_count(n[i], where(key) + "[" + std::to_string(i) + "]");
      if (v) out.push_back(*v);
    }
    return out;
  }

  /// Reports keys that no reader asked for.
  void finish() {
    if (!present_) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(key, "unknown field");
    }
  }

 private:
  std::optional<double> scalar_real(const YAML::Node& n, const std::string& path) {
    double v = 0.0;
    if (!n.IsScalar() || !YAML::convert<double>::decode(n, v)) {
      errors_.push_back(path + ": must be a number");
      return std::nullopt;
    }
    if (!std::isfinite(v)) {
      errors_.push_back(path + ": must be finite");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::size_t> scalar_count(const YAML::Node& n, const std::string& path) {
    long long v = 0;
    if (!n.IsScalar() || !YAML::convert<long long>::decode(n, v)) {
      errors_.push_back(path + ": must be an integer");
      return std::nullopt;
    }
    if (v < 0) {
      errors_.push_back(path + ": must be >= 0");
      return std::nullopt;
    }
    return static_cast<std::size_t>(v);
  }

  std::vector<std::string>& errors_;
  YAML::Node node_;
  bool present_ = false;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> widen(std::vector<double> v, std::size_t dof) {
  if (v.size() == 1 && dof > 1) v.assign(dof, v.front());
  return v;
}

void require_positive_list(Section& s, const std::string& key, const std::vector<double>& v,
                           bool required) {
  if (v.empty()) {
    if (required) s.fail(key, "must be a non-empty list");
    return;
  }
  for (double d : v) {
    if (!(d > 0.0)) {
      s.fail(key, "entries must be > 0");
      return;
    }
  }
}

void require_count_list(Section& s, const std::string& key, const std::vector<std::size_t>& v,
                        std::size_t minimum, bool required) {
  if (v.empty()) {
    if (required) s.fail(key, "must be a non-empty list");
    return;
  }
  for (auto n : v) {
    if (n < minimum) {
      s.fail(key, "entries must be >= " + std::to_string(minimum));
      return;
    }
  }
}

std::vector<cplx> read_samples(const std::string& path, std::vector<std::string>& errors) {
  std::ifstream in(path);
  if (!in) {
    errors.push_back("initial_state.file: cannot open '" + path + "'");
    return {};
  }
  std::vector<cplx> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double re = 0.0, im = 0.0;
    if (!(ls >> re >> im) || !std::isfinite(re) || !std::isfinite(im)) {
      errors.push_back("initial_state.file: line " + std::to_string(row) + " is not 're,im'");
      return {};
    }
    out.emplace_back(re, im);
  }
  return out;
}

}  // namespace

std::string to_string(Task t) {
  switch (t) {
    case Task::Propagate:
      return "propagate";
    case Task::Bohm:
      return "bohm";
    case Task::Convergence:
      return "convergence";
    case Task::Zeno:
      return "zeno";
    case Task::Mott:
      return "mott";
  }
  return "unknown";
}

std::optional<Task> task_from_string(const std::string& s) {
  for (Task t : {Task::Propagate, Task::Bohm, Task::Convergence, Task::Zeno, Task::Mott}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

SpatialGrid ScenarioConfig::spatial_grid() const { return SpatialGrid(grid.x_min, grid.x_max, grid.points); }

const PotentialSpec& ScenarioConfig::potential_spec() const {
  if (!potential) throw Error("cli", "run_scenario", "scenario has no potential");
  return *potential;
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error("cli", "parse_config", join(violations, "; ")), violations_(std::move(violations)) {}

ScenarioConfig parse_config(const std::string& text, const std::string& base_dir, std::optional<Task> expected) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError({"syntax error at line " + std::to_string(e.mark.line + 1) + ", column " +
                       std::to_string(e.mark.column + 1) + ": " + e.msg});
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  std::vector<std::string> errors;
  ScenarioConfig cfg;
  cfg.source = text;
  Section top(errors, root, "");
  if (!top.present()) throw ConfigError(errors);

  const std::string task = top.text("task", "");
  if (expected) cfg.task = *expected;
  if (!task.empty()) {
    if (auto t = task_from_string(task)) {
      if (expected && *t != *expected) {
        top.fail("task", "is '" + task + "' but the command runs '" + to_string(*expected) + "'");
      }
      cfg.task = *t;
    } else {
      top.fail("task", "must be one of propagate, bohm, convergence, zeno, mott (got '" + task + "')");
    }
  } else if (!expected) {
    top.fail("task", "is required");
  }
  if (top.has("seed")) {
    cfg.seed = top.count("seed", 0);
    cfg.seed_given = true;
  }

  // system
  {
    Section s(errors, top.child("system"), "system");
    const double hbar = s.real("hbar", 1.0);
    auto masses = s.reals("masses", {1.0});
    const std::size_t dof = s.count("dof", masses.size());
    if (!(hbar > 0.0)) s.fail("hbar", "must be > 0");
    if (dof < 1) s.fail("dof", "must be >= 1");
    masses = widen(masses, dof);
    if (masses.size() != dof) s.fail("masses", "needs one entry per degree of freedom");
    require_positive_list(s, "masses", masses, true);
    s.finish();
    if (hbar > 0.0 && dof >= 1 && masses.size() == dof &&
        std::all_of(masses.begin(), masses.end(), [](double m) { return m > 0.0; })) {
      cfg.system = SystemConfig(hbar, masses);
    }
  }
  const std::size_t dof = cfg.system.dof();

  // grid
  {
    Section s(errors, top.child("grid"), "grid");
    cfg.grid.x_min = s.real("x_min", cfg.grid.x_min);
    cfg.grid.x_max = s.real("x_max", cfg.grid.x_max);
    cfg.grid.points = s.count("points", cfg.grid.points);
    if (cfg.grid.points < SpatialGrid::kMinPoints) s.fail("points", "must be >= 8");
    if (!(cfg.grid.x_max > cfg.grid.x_min)) s.fail("x_max", "must be > grid.x_min");
    s.finish();
  }

  // time
  {
    Section s(errors, top.child("time"), "time");
    cfg.time.t0 = s.real("t0", cfg.time.t0);
    cfg.time.t = s.real("t", cfg.time.t);
    cfg.time.steps = s.count("steps", cfg.time.steps);
    if (cfg.time.steps < 1) s.fail("steps", "must be >= 1");
    if (cfg.time.t == cfg.time.t0) s.fail("t", "must differ from time.t0");
    s.finish();
  }

  // potential
  {
    Section s(errors, top.child("potential"), "potential");
    const std::string kind = s.text("kind", "free");
    try {
      if (kind == "free") {
        cfg.potential = PotentialSpec::free(dof);
      } else if (kind == "harmonic") {
        const double m = s.real("mass", 1.0), w = s.real("omega", 1.0);
        if (!(m > 0.0)) s.fail("mass", "must be > 0");
        if (!(w > 0.0)) s.fail("omega", "must be > 0");
        if (m > 0.0 && w > 0.0) cfg.potential = PotentialSpec::harmonic(m, w, dof);
      } else if (kind == "quartic") {
        cfg.potential = PotentialSpec::quartic(s.real("coefficient", 1.0), dof);
      } else if (kind == "tabulated") {
        const auto samples = s.reals("samples", {});
        const double lo = s.real("x_min", cfg.grid.x_min), hi = s.real("x_max", cfg.grid.x_max);
        if (samples.size() < SpatialGrid::kMinPoints) s.fail("samples", "needs at least 8 values");
        if (!(hi > lo)) s.fail("x_max", "must be > potential.x_min");
        if (dof != 1) s.fail("kind", "tabulated potentials need system.dof = 1");
        if (samples.size() >= SpatialGrid::kMinPoints && hi > lo && dof == 1) {
          cfg.potential = PotentialSpec::tabulated(SpatialGrid(lo, hi, samples.size()), samples);
        }
      } else {
        s.fail("kind", "unknown potential variant '" + kind + "'; allowed: free, harmonic, quartic, tabulated");
      }
    } catch (const Error& e) {
      s.fail("kind", e.detail());
    }
    s.finish();
  }

  // initial state
  {
    Section s(errors, top.child("initial_state"), "initial_state");
    const std::string kind = s.text("kind", "gaussian");
    if (kind == "gaussian") {
      const auto center = widen(s.reals("center", {0.0}), dof);
      const auto sigma = widen(s.reals("sigma", {1.0}), dof);
      const auto momentum = widen(s.reals("momentum", {0.0}), dof);
      bool ok = true;
      for (const auto& [key, v] : {std::pair{"center", &center}, {"sigma", &sigma}, {"momentum", &momentum}}) {
        if (v->size() != dof) {
          s.fail(key, "needs one entry per degree of freedom");
          ok = false;
        }
      }
      if (std::any_of(sigma.begin(), sigma.end(), [](double v) { return !(v > 0.0); })) {
        s.fail("sigma", "entries must be > 0");
        ok = false;
      }
      if (ok) cfg.initial.gaussian = GaussianParams::normalized(center, sigma, momentum);
    } else if (kind == "file") {
      cfg.initial.file = s.text("path", "");
      if (cfg.initial.file.empty()) {
        s.fail("path", "required for kind 'file'");
      } else {
        std::filesystem::path p(cfg.initial.file);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        auto samples = read_samples(p.string(), errors);
        if (!samples.empty() && samples.size() != cfg.grid.points) {
          s.fail("path", "has " + std::to_string(samples.size()) + " samples but grid.points is " +
                             std::to_string(cfg.grid.points));
        } else if (!samples.empty()) {
          cfg.initial.samples = std::move(samples);
        }
      }
    } else {
      s.fail("kind", "unknown initial state '" + kind + "'; allowed: gaussian, file");
    }
    s.finish();
  }

  // task sections: each is read whenever present so typos are reported.
  {
    Section s(errors, top.child("propagate"), "propagate");
    cfg.propagate.kernel = s.text("kernel", cfg.propagate.kernel);
    static const std::set<std::string> kernels{"exact-free", "mehler", "van-vleck", "kerner-sutcliffe", "reference"};
    if (!kernels.count(cfg.propagate.kernel)) {
      s.fail("kernel", "must be one of exact-free, mehler, van-vleck, kerner-sutcliffe, reference");
    }
    s.finish();
  }
  {
    Section s(errors, top.child("bohm"), "bohm");
    cfg.bohm.x0 = s.reals("x0", cfg.bohm.x0);
    cfg.bohm.evolution = s.text("evolution", cfg.bohm.evolution);
    cfg.bohm.substeps = s.count("substeps", cfg.bohm.substeps);
    if (cfg.bohm.x0.empty()) s.fail("x0", "must be a non-empty list");
    if (cfg.bohm.evolution != "analytic" && cfg.bohm.evolution != "reference") {
      s.fail("evolution", "must be analytic or reference");
    }
    if (cfg.bohm.substeps < 1) s.fail("substeps", "must be >= 1");
    s.finish();
  }
  {
    Section s(errors, top.child("convergence"), "convergence");
    auto& c = cfg.convergence;
    c.study = s.text("study", "");
    c.kernel = s.text("kernel", c.kernel);
    c.x = s.real("x", c.x);
    c.x0 = s.real("x0", c.x0);
    c.p0 = s.real("p0", c.p0);
    c.dt = s.reals("dt", {});
    c.N = s.counts("N", {});
    c.points = s.counts("points", {});
    c.reference_steps = s.count("reference_steps", c.reference_steps);
    c.snapshots_per_dt = s.count("snapshots_per_dt", c.snapshots_per_dt);
    if (cfg.task == Task::Convergence) {
      static const std::set<std::string> dt_studies{"kernel", "action", "wavefunction", "theorem1", "theorem2",
                                                    "theorem3"};
      static const std::set<std::string> n_studies{"time-slicing", "theorem4"};
      if (dt_studies.count(c.study)) {
        require_positive_list(s, "dt", c.dt, true);
        if (c.dt.size() < 3) s.fail("dt", "needs at least 3 entries for an order fit");
      } else if (n_studies.count(c.study)) {
        require_count_list(s, "N", c.N, 1, true);
        if (c.N.size() < 3) s.fail("N", "needs at least 3 entries for an order fit");
      } else if (c.study == "invariants") {
        require_count_list(s, "points", c.points, SpatialGrid::kMinPoints, true);
        if (c.points.size() < 3) s.fail("points", "needs at least 3 entries for an order fit");
      } else {
        s.fail("study",
               "must be one of kernel, action, wavefunction, time-slicing, theorem1, theorem2, theorem3, "
               "theorem4, invariants");
      }
      if (c.reference_steps < 1) s.fail("reference_steps", "must be >= 1");
      if (c.snapshots_per_dt < 1) s.fail("snapshots_per_dt", "must be >= 1");
    }
    s.finish();
  }
  {
    Section s(errors, top.child("zeno"), "zeno");
    auto& z = cfg.zeno;
    z.mode = s.text("mode", z.mode);
    z.N = s.counts("N", {});
    z.sigma_meas = s.reals("sigma_meas", z.sigma_meas);
    z.q_evolution = s.text("q_evolution", z.q_evolution);
    z.steps_per_segment = s.count("steps_per_segment", z.steps_per_segment);
    z.x0 = s.real("x0", z.x0);
    {
      Section z0(errors, s.child("z0"), "zeno.z0");
      z.z0_x = widen(z0.reals("x", z.z0_x), dof);
      z.z0_p = widen(z0.reals("p", z.z0_p), dof);
      if (z.z0_x.size() != dof) z0.fail("x", "needs one entry per degree of freedom");
      if (z.z0_p.size() != dof) z0.fail("p", "needs one entry per degree of freedom");
      z0.finish();
    }
    if (cfg.task == Task::Zeno) {
      require_count_list(s, "N", z.N, 1, true);
      if (z.mode != "flow" && z.mode != "wavefunction") s.fail("mode", "must be flow or wavefunction");
      if (z.q_evolution != "frozen" && z.q_evolution != "thawed") s.fail("q_evolution", "must be frozen or thawed");
      require_positive_list(s, "sigma_meas", z.sigma_meas, true);
      if (z.steps_per_segment < 2) s.fail("steps_per_segment", "must be >= 2");
    }
    s.finish();
  }
  {
    Section s(errors, top.child("mott"), "mott");
    auto& m = cfg.mott;
    m.N = s.count("N", m.N);
    m.sigma_meas = s.real("sigma_meas", m.sigma_meas);
    m.steps_per_segment = s.count("steps_per_segment", m.steps_per_segment);
    m.speed = s.real("speed", m.speed);
    m.t = s.real("t", m.t);
    m.emissions = s.count("emissions", m.emissions);
    if (cfg.task == Task::Mott) {
      if (m.N < 3) s.fail("N", "must be >= 3");
      if (!(m.sigma_meas > 0.0)) s.fail("sigma_meas", "must be > 0");
      if (!(m.speed > 0.0)) s.fail("speed", "must be > 0");
      if (!(m.t > 0.0)) s.fail("t", "must be > 0");
      if (m.emissions < 1) s.fail("emissions", "must be >= 1");
      if (m.steps_per_segment < 2) s.fail("steps_per_segment", "must be >= 2");
      if (dof != 2) errors.push_back("system.dof: the mott task needs 2 degrees of freedom");
    }
    s.finish();
  }
  top.finish();

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

ScenarioConfig load_config(const std::string& path, std::optional<Task> task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", "load_config", "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(buf.str(), dir.empty() ? "." : dir.string(), task);
}

}  // namespace qtraj
