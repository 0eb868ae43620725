// Acceptance suite: one PASS/FAIL line per criterion, each with its runtime limit.
//   acceptance [--criterion N] [--configs DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "qtraj/scenario.hpp"
#include "qtraj/studies.hpp"

using namespace qtraj;

namespace {

std::string g_configs = QTRAJ_CONFIG_DIR;

struct Verdict {
  bool pass = true;
  std::string detail;
  std::vector<std::string> info;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [not met]");
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

ResultTable run(const std::string& name) { return run_scenario(load_config(g_configs + "/" + name)).table; }

struct Series {
  std::vector<double> step, error;
  double order = std::nan("");
};

Series series(const ResultTable& t, const std::string& name) {
  const auto cs = t.column("series"), ch = t.column("step"), ce = t.column("error"), co = t.column("fitted_order");
  Series s;
  for (const auto& row : t.rows()) {
    if (std::get<std::string>(row[cs]) != name) continue;
    if (std::holds_alternative<double>(row[co])) {
      s.order = std::get<double>(row[co]);
    } else if (std::holds_alternative<double>(row[ch])) {
      s.step.push_back(std::get<double>(row[ch]));
      s.error.push_back(std::get<double>(row[ce]));
    } else {
      s.error.push_back(std::get<double>(row[ce]));
    }
  }
  if (s.error.empty()) throw Error("acceptance", "series", "no series named '" + name + "'");
  return s;
}

double value(const ResultTable& t, const std::string& name) { return series(t, name).error.front(); }

Verdict order_at_least(const std::string& config, const std::string& name, double min_order) {
  Verdict v;
  const auto s = series(run(config), name);
  v.require(s.order >= min_order, name + " order " + fmt(s.order) + " >= " + fmt(min_order));
  return v;
}

Verdict criterion1() {
  const auto t = run("c01_kernel.yaml");
  Verdict v;
  const auto a = series(t, "kernel_abs"), r = series(t, "kernel_rel");
  v.require(a.order >= 1.9, "kernel |K - K_exact| order " + fmt(a.order) + " >= 1.9");
  v.info.push_back("relative kernel error order " + fmt(r.order));
  return v;
}

Verdict criterion4() {
  const auto s = series(run("c04_time_slicing.yaml"), "time_slicing_l2");
  Verdict v;
  bool monotone = true;
  for (std::size_t k = 1; k < s.error.size(); ++k) monotone = monotone && s.error[k] < s.error[k - 1];
  v.require(monotone, "errors decrease with N");
  v.require(s.order >= 0.9, "order " + fmt(s.order) + " >= 0.9");
  return v;
}

Verdict criterion5() {
  const auto t = run("c05_bohm_short_time.yaml");
  Verdict v;
  const auto x = series(t, "position"), p = series(t, "momentum"), pq = series(t, "momentum_with_quantum_force");
  v.require(x.order >= 1.9, "position law order " + fmt(x.order) + " >= 1.9");
  v.require(p.order >= 1.9, "momentum law order " + fmt(p.order) + " >= 1.9");
  v.info.push_back("momentum law including the quantum force: order " + fmt(pq.order));
  return v;
}

Verdict criterion6() {
  Verdict v;
  for (const char* cfg : {"c06_q_drift_free.yaml", "c06_q_drift_coherent.yaml"}) {
    const auto s = series(run(cfg), "q_drift");
    v.require(s.order >= 1.9, std::string(cfg) + " drift order " + fmt(s.order) + " >= 1.9");
  }
  return v;
}

Verdict criterion7() {
  const auto t = run("c07_flow_gap.yaml");
  Verdict v;
  const auto s = series(t, "flow_gap");
  v.require(s.order >= 1.9, "flow gap order " + fmt(s.order) + " >= 1.9");
  v.info.push_back("off-centre start: order " + fmt(series(t, "flow_gap_off_centre").order));
  return v;
}

Verdict criterion8() {
  const auto s = series(run("c08_trotter.yaml"), "trotter_error");
  Verdict v;
  v.require(s.order >= 0.9, "order " + fmt(s.order) + " >= 0.9");
  v.require(s.error.back() < 2e-3, "error at N=1024 " + fmt(s.error.back()) + " < 2e-3");
  return v;
}

Verdict criterion9() {
  const auto t = run("c09_zeno_flow.yaml");
  const auto cn = t.column("N"), ce = t.column("classical_error");
  std::vector<std::int64_t> n;
  std::vector<double> e;
  for (const auto& row : t.rows()) {
    n.push_back(std::get<std::int64_t>(row[cn]));
    e.push_back(std::get<double>(row[ce]));
  }
  Verdict v;
  bool monotone = true;
  double e4 = std::nan(""), e64 = std::nan("");
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (k > 0) monotone = monotone && e[k] <= 1.05 * e[k - 1];
    if (n[k] == 4) e4 = e[k];
    if (n[k] == 64) e64 = e[k];
  }
  v.require(monotone, "error non-increasing in N within 5%");
  v.require(e64 < e4 / 8.0, "error(64) " + fmt(e64) + " < error(4)/8 = " + fmt(e4 / 8.0));
  return v;
}

Verdict criterion10() {
  const auto t = run("c10_mott.yaml");
  const auto cs = t.column("straightness");
  Verdict v;
  double worst = 0.0;
  for (const auto& row : t.rows()) worst = std::max(worst, std::get<double>(row[cs]));
  v.require(t.rows().size() == 10, std::to_string(t.rows().size()) + " emissions");
  v.require(worst < 0.02, "worst straightness " + fmt(worst) + " < 0.02");
  return v;
}

Verdict criterion11() {
  const auto t = run("c11_invariants.yaml");
  Verdict v;
  const double qp = value(t, "qp_form_gap");
  v.require(qp < 1e-6, "Q form gap " + fmt(qp) + " < 1e-6");
  const double vc = value(t, "vbar_coincidence"), vh = value(t, "vbar_half_gradient");
  v.require(vc < 1e-10 && vh < 1e-10, "Vbar identities " + fmt(vc) + ", " + fmt(vh) + " < 1e-10");
  const double nd = value(t, "reference_norm_drift_per_1000_steps");
  v.require(nd < 1e-10, "norm drift " + fmt(nd) + " < 1e-10");
  const double sc = value(t, "symplectic_classical"), sq = value(t, "symplectic_gaussian_q");
  v.require(sc < 1e-4 && sq < 1e-4, "symplectic defects " + fmt(sc) + ", " + fmt(sq) + " < 1e-4");
  const auto cr = series(t, "continuity_residual");
  v.require(cr.order >= 1.5, "continuity residual order " + fmt(cr.order) + " >= 1.5");
  return v;
}

struct Criterion {
  int id;
  const char* title;
  double limit_s;
  std::function<Verdict()> check;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "short-time kernel convergence", 1.0, criterion1},
      {2, "short-time action convergence", 1.0, [] { return order_at_least("c02_action.yaml", "action", 2.0); }},
      {3, "single-slice wavefunction convergence", 30.0,
       [] { return order_at_least("c03_wavefunction.yaml", "wavefunction_l2", 1.9); }},
      {4, "time-sliced evolution convergence", 120.0, criterion4},
      {5, "Bohmian short-time laws", 60.0, criterion5},
      {6, "quantum potential drift", 60.0, criterion6},
      {7, "quantum-classical flow gap", 10.0, criterion7},
      {8, "Trotter composition of Euler steps", 5.0, criterion8},
      {9, "observation-frequency sweep", 30.0, criterion9},
      {10, "Mott track straightness", 30.0, criterion10},
      {11, "structural invariants", 300.0, criterion11},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (a == "--configs" && i + 1 < argc) {
      g_configs = argv[++i];
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N] [--configs DIR]\n");
      return 2;
    }
  }
  int failed = 0, ran = 0;
  for (const auto& c : criteria()) {
    if (only && c.id != only) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool ok = v.pass && in_time;
    failed += ok ? 0 : 1;
    std::printf("criterion %2d %s  %s: %s; runtime %.2f s (limit %.0f s%s)\n", c.id, ok ? "PASS" : "FAIL", c.title,
                v.detail.c_str(), secs, c.limit_s, in_time ? "" : ", exceeded");
    for (const auto& line : v.info) std::printf("             info: %s\n", line.c_str());
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return failed ? 1 : 0;
}
