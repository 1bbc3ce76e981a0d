// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dampsym/commands.hpp"
#include "dampsym/diagnostics.hpp"
#include "test_support.hpp"

using namespace dampsym;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = DAMPSYM_CONFIG_DIR;
const fs::path kTmp = fs::path(DAMPSYM_TEST_TMP) / "acceptance";

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double time_limit_s;  // <= 0: no limit
  std::function<Outcome()> body;
};

std::vector<RunConfig> paper_configs() {
  return {load_config(kConfigs / "paper_1d.json"), load_config(kConfigs / "paper_2d.json")};
}

double max_component_diff(const PhaseState& a, const PhaseState& b) {
  const Vector x = a.stacked();
  const Vector y = b.stacked();
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome equivalence() {
  Outcome o;
  for (const RunConfig& cfg : paper_configs()) {
    const auto a = integrate(cfg.system, cfg.initial, 0.2, 500, Method::midpoint_direct);
    const auto b = integrate(cfg.system, cfg.initial, 0.2, 500, Method::midpoint_indirect, cfg.epsilon);
    double worst = 0.0;
    std::size_t singular = 0;
    for (std::size_t k = 0; k < 500; ++k) {
      if (b.steps[k].singular) {
        ++singular;
        continue;
      }
      worst = std::max(worst, max_component_diff(a.steps[k].state, b.steps[k].state));
    }
    o.pass = o.pass && worst <= 1e-11;
    o.detail += "n=" + std::to_string(cfg.system.dof()) + ": max " + fmt(worst) + ", singular " +
                std::to_string(singular) + "; ";
  }
  return o;
}

Outcome symplectic_verdicts() {
  Outcome o;
  for (const RunConfig& cfg : paper_configs()) {
    const SymplecticForm form(cfg.system.dof());
    const FactorPair f = direct_factors(cfg.system, 0.2);
    const double bound = symplectic_defect(LuFactorization(f.lhs).solve(f.rhs), form);
    bool ok = bound >= 1e-6;
    const auto tr = integrate(cfg.system, cfg.initial, 0.2, 500, Method::midpoint_indirect, cfg.epsilon);
    double worst_f2 = 0.0;
    double least_f1 = INFINITY;
    for (const StepRecord& r : tr.steps) {
      least_f1 = std::min(least_f1, r.defect_direct);
      if (!r.singular) worst_f2 = std::max(worst_f2, *r.defect_indirect);
    }
    ok = ok && worst_f2 <= 1e-10 && least_f1 >= bound * (1.0 - 1e-12);
    o.pass = o.pass && ok;
    o.detail += "n=" + std::to_string(cfg.system.dof()) + ": F1 bound " + fmt(bound) + ", min F1 " +
                fmt(least_f1) + ", max F2 " + fmt(worst_f2) + "; ";
  }
  return o;
}

Outcome energy_identity() {
  Outcome o;
  for (const RunConfig& cfg : paper_configs()) {
    for (Method m : {Method::midpoint_direct, Method::midpoint_indirect}) {
      const auto rep = energy_report(integrate(cfg.system, cfg.initial, 0.2, 1000, m, cfg.epsilon));
      const double tol = 1e-13 * std::max(1.0, rep.initial_energy);
      o.pass = o.pass && rep.max_identity_residual <= tol;
      o.detail += "n=" + std::to_string(cfg.system.dof()) + " " + std::string(to_string(m)) + ": " +
                  fmt(rep.max_identity_residual) + "; ";
    }
  }
  return o;
}

Outcome ledger_constancy() {
  Outcome o;
  for (const RunConfig& cfg : paper_configs()) {
    const auto mid = energy_report(integrate(cfg.system, cfg.initial, 0.2, 1000, Method::midpoint_direct));
    const auto rk = energy_report(integrate(cfg.system, cfg.initial, 0.2, 1000, Method::rk4));
    o.pass = o.pass && mid.max_hhat_drift <= 1e-10 && rk.max_hhat_drift > mid.max_hhat_drift;
    o.detail += "n=" + std::to_string(cfg.system.dof()) + ": midpoint " + fmt(mid.max_hhat_drift) +
                ", rk4 " + fmt(rk.max_hhat_drift) + " (final " + fmt(rk.final_hhat_drift) + "); ";
  }
  return o;
}

Outcome monotone_decay() {
  Outcome o;
  for (const RunConfig& cfg : paper_configs()) {
    bool certified = cfg.system.monotone_energy_certified();
    std::size_t violations = 0;
    for (Method m : {Method::midpoint_direct, Method::midpoint_indirect}) {
      const auto tr = integrate(cfg.system, cfg.initial, 0.2, 1000, m, cfg.epsilon);
      double prev = tr.initial_energy();
      for (const StepRecord& r : tr.steps) {
        if (r.energy > prev) ++violations;
        prev = r.energy;
      }
    }
    o.pass = o.pass && certified && violations == 0;
    o.detail += "n=" + std::to_string(cfg.system.dof()) + ": certified " + (certified ? "yes" : "no") +
                ", increases " + std::to_string(violations) + "; ";
  }
  return o;
}

Outcome convergence_orders() {
  Outcome o;
  const RunConfig cfg = load_config(kConfigs / "paper_1d.json");
  struct Want {
    Method m;
    double order, tol;
  };
  for (const Want w : {Want{Method::midpoint_direct, 2.0, 0.1}, Want{Method::rk4, 4.0, 0.2}}) {
    const auto table = convergence_study(cfg.system, cfg.initial, 0.1, 4, 10.0, w.m);
    o.detail += std::string(to_string(w.m)) + " orders";
    for (const ConvergenceRow& r : table.rows) {
      if (!r.order) continue;
      o.pass = o.pass && std::abs(*r.order - w.order) <= w.tol;
      char buf[16];
      std::snprintf(buf, sizeof buf, " %.3f", *r.order);
      o.detail += buf;
    }
    o.detail += "; ";
  }
  return o;
}

Outcome cayley_suite() {
  Outcome o;
  double worst_group = 0.0, worst_algebra = 0.0;
  double least_group = INFINITY, least_algebra = INFINITY;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 4);
    const SymplecticForm j(n);
    const Matrix b = testing::random_hamiltonian(n, testing::uniform(0.05, 0.85));
    worst_algebra = std::max(worst_algebra, infinitesimal_symplectic_defect(b, j));
    worst_group = std::max(worst_group, symplectic_defect(cayley(b), j));

    Matrix a = testing::random_antisymmetric(2 * n);
    a *= 0.05 / a.frobenius_norm();
    const double delta = testing::uniform(0.05, 0.1);
    const Matrix bad = b - delta * Matrix::identity(2 * n) + j.inverse() * a;
    least_algebra = std::min(least_algebra, infinitesimal_symplectic_defect(bad, j));
    least_group = std::min(least_group, symplectic_defect(cayley(bad), j));
  }
  o.pass = worst_algebra <= 1e-12 && worst_group <= 1e-10 && least_algebra >= 1e-3 &&
           least_group >= 1e-3;
  o.detail = "sp: max " + fmt(worst_algebra) + ", Sp: max " + fmt(worst_group) +
             "; perturbed: min " + fmt(least_algebra) + " / " + fmt(least_group);
  return o;
}

Outcome conservative() {
  Outcome o;
  const auto sys = make_system(Matrix{{2, 0}, {0, 3}}, Matrix(2, 2), "undamped");
  const PhaseState z0{0.0, {0.1, 0.2}, {0.1, 0.2}};
  const auto a = integrate(sys, z0, 0.1, 10000, Method::midpoint_direct);
  const auto b = integrate(sys, z0, 0.1, 10000, Method::midpoint_indirect);
  const double e0 = a.initial_energy();
  double variation = 0.0;
  bool identical = true;
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    variation = std::max(variation, std::abs(a.steps[k].energy - e0) / e0);
    identical = identical && a.steps[k].state == b.steps[k].state;
  }
  o.pass = variation <= 1e-12 && identical;
  o.detail = "relative variation " + fmt(variation) + ", direct == indirect: " + (identical ? "yes" : "no");
  return o;
}

Outcome determinism() {
  RunConfig cfg = load_config(kConfigs / "paper_1d.json");
  cfg.output_prefix = (kTmp / "first").string();
  const std::string first = slurp(cmd_run(cfg).files[0]);
  cfg.output_prefix = (kTmp / "second").string();
  const std::string second = slurp(cmd_run(cfg).files[0]);
  Outcome o;
  o.pass = !first.empty() && first == second;
  o.detail = std::to_string(first.size()) + " bytes, identical: " + (first == second ? "yes" : "no");
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "direct/indirect equivalence", 1.0, equivalence},
      {2, "symplectic verdicts", 0.0, symplectic_verdicts},
      {3, "discrete energy identity", 0.0, energy_identity},
      {4, "substituting Hamiltonian ledger", 0.0, ledger_constancy},
      {5, "monotone energy decay", 0.0, monotone_decay},
      {6, "convergence orders", 1.0, convergence_orders},
      {7, "Cayley transform properties", 0.0, cayley_suite},
      {8, "conservative degeneration", 0.0, conservative},
      {9, "CLI determinism", 0.0, determinism},
  };
  int failures = 0;
  double total = 0.0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    total += secs;
    if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail += " over time limit";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s) [%.3f s]: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, secs,
                o.detail.c_str());
  }
  const bool fast = total < 10.0;
  if (!fast) ++failures;
  std::printf("%s total runtime %.3f s\n", fast ? "PASS" : "FAIL", total);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
