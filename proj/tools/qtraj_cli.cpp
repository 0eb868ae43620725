#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "qtraj/results.hpp"
#include "qtraj/scenario.hpp"
#include "qtraj/studies.hpp"

namespace {

struct Options {
  std::string config;
  std::string output = "-";
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
};

void report(const std::string& module, const std::string& operation, const std::string& message,
            const std::vector<std::string>& violations = {}) {
  nlohmann::ordered_json err;
  err["error"] = {{"module", module}, {"operation", operation}, {"message", message}};
  if (!violations.empty()) err["error"]["violations"] = violations;
  std::cerr << err.dump() << '\n';
}

int run(qtraj::Task task, const Options& opt) {
  auto cfg = qtraj::load_config(opt.config, task);
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.seed_given = true;
  }
  const auto start = std::chrono::steady_clock::now();
  const auto result = qtraj::run_scenario(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  qtraj::RunMetadata meta{qtraj::to_string(task), result.study, cfg.seed, qtraj::fnv1a_hex(cfg.source), wall,
                          qtraj::kVersion};
  const std::string body = opt.format == "json" ? qtraj::to_json(result.table, meta) : qtraj::to_csv(result.table);
  if (opt.output == "-") {
    std::cout << body;
  } else {
    std::ofstream out(opt.output, std::ios::binary);
    if (!out) throw qtraj::Error("cli", "write_output", "cannot open '" + opt.output + "' for writing");
    out << body;
    if (!out) throw qtraj::Error("cli", "write_output", "failed writing '" + opt.output + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Short-time propagators, Bohmian trajectories and repeated-observation studies"};
  app.require_subcommand(1);
  Options opt;
  qtraj::Task task = qtraj::Task::Propagate;

  const std::pair<qtraj::Task, const char*> commands[] = {
      {qtraj::Task::Propagate, "Evolve a wavefunction with a kernel or the reference solver"},
      {qtraj::Task::Bohm, "Integrate Bohmian trajectories"},
      {qtraj::Task::Convergence, "Run a convergence-order or invariant study"},
      {qtraj::Task::Zeno, "Sweep repeated-observation runs over N"},
      {qtraj::Task::Mott, "Straight-track demo for 2-D emissions"},
  };
  for (const auto& [t, help] : commands) {
    auto* sub = app.add_subcommand(qtraj::to_string(t), help);
    sub->add_option("--config", opt.config, "Scenario file (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", opt.output, "Result file, '-' for stdout");
    sub->add_option("--seed", opt.seed, "Random seed (required by mott)");
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->callback([&task, t = t] { task = t; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report("cli", "parse_arguments", e.what());
    return 2;
  }

  try {
    return run(task, opt);
  } catch (const qtraj::ConfigError& e) {
    report(e.module(), e.operation(), "invalid scenario", e.violations());
    return 2;
  } catch (const qtraj::Error& e) {
    report(e.module(), e.operation(), e.detail());
    return 1;
  } catch (const std::exception& e) {
    report("cli", "run", e.what());
    return 1;
  }
}
