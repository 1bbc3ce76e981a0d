#include "dampsym/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "dampsym/diagnostics.hpp"
#include "dampsym/parallel.hpp"

namespace dampsym {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

std::filesystem::path artifact(const RunConfig& cfg, const std::string& suffix) {
  const std::string prefix = cfg.output_prefix.empty() ? std::string("dampsym") : cfg.output_prefix;
  return std::filesystem::path(prefix + suffix);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_optional(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

void append_state_header(std::ostringstream& os, std::size_t n, const std::string& prefix) {
  for (std::size_t i = 0; i < n; ++i) os << ',' << prefix << "q_" << i;
  for (std::size_t i = 0; i < n; ++i) os << ',' << prefix << "p_" << i;
}

void append_state(std::ostringstream& os, const PhaseState& s) {
  for (double v : s.q) os << ',' << format_double(v);
  for (double v : s.p) os << ',' << format_double(v);
}

const PhaseState& state_at(const Trajectory& tr, std::size_t k) {
  return k == 0 ? tr.initial : tr.steps[k - 1].state;
}

std::string trajectory_csv(const Trajectory& tr, const EnergyReport& rep) {
  const std::size_t n = tr.system.dof();
  std::ostringstream os;
  os << "step,t";
  append_state_header(os, n, "");
  os << ",E,work_cum,hhat,defect_direct,defect_indirect,singular\n";
  for (std::size_t k = 0; k <= tr.steps.size(); ++k) {
    const EnergySample& e = rep.series[k];
    os << k << ',' << format_double(e.t);
    append_state(os, state_at(tr, k));
    os << ',' << format_double(e.energy) << ',' << format_double(e.work_cumulative) << ','
       << format_double(e.hhat);
    if (k == 0) {
      os << ",,,0\n";
    } else {
      const StepRecord& rec = tr.steps[k - 1];
      os << ',' << format_double(rec.defect_direct) << ',' << csv_optional(rec.defect_indirect)
         << ',' << (rec.singular ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

struct DefectStats {
  double direct_max = 0.0;
  std::optional<double> indirect_max;
  std::size_t singular = 0;
};

DefectStats defect_stats(const Trajectory& tr) {
  DefectStats s;
  for (const StepRecord& rec : tr.steps) {
    s.direct_max = std::max(s.direct_max, rec.defect_direct);
    if (rec.singular) ++s.singular;
    if (rec.defect_indirect)
      s.indirect_max = std::max(s.indirect_max.value_or(0.0), *rec.defect_indirect);
  }
  return s;
}

json energy_json(const EnergyReport& rep) {
  return json{{"initial_energy", rep.initial_energy},
              {"final_energy", rep.series.back().energy},
              {"max_hhat_drift", rep.max_hhat_drift},
              {"final_hhat_drift", rep.final_hhat_drift},
              {"max_identity_residual", rep.max_identity_residual},
              {"energy_nonincreasing", rep.energy_nonincreasing},
              {"work_nondecreasing", rep.work_nondecreasing},
              {"singular_steps", rep.singular_steps}};
}

json files_json(const std::vector<std::filesystem::path>& files) {
  json out = json::array();
  for (const auto& f : files) out.push_back(f.string());
  return out;
}

json period_json(const Trajectory& tr) {
  try {
    return json{{"component", 0}, {"period", period_estimate(tr, 0)}};
  } catch (const InsufficientOscillationError& e) {
    return json{{"component", 0}, {"period", nullptr}, {"reason", e.what()}};
  }
}

}  // namespace

CommandResult cmd_run(const RunConfig& cfg) {
  validate(cfg);
  const auto start = Clock::now();
  const Trajectory tr =
      integrate(cfg.system, cfg.initial, cfg.tau, cfg.n_steps, cfg.method, cfg.epsilon);
  const EnergyReport rep = energy_report(tr);
  const DefectStats defects = defect_stats(tr);

  CommandResult res;
  res.files = {artifact(cfg, ".trajectory.csv"), artifact(cfg, ".summary.json")};
  write_file_atomic(res.files[0], trajectory_csv(tr, rep));

  res.summary = json{{"command", "run"},
                     {"label", cfg.system.label()},
                     {"method", std::string(to_string(cfg.method))},
                     {"tau", cfg.tau},
                     {"n_steps", cfg.n_steps},
                     {"epsilon", cfg.epsilon},
                     {"monotone_energy_certified", cfg.system.monotone_energy_certified()},
                     {"energy", energy_json(rep)},
                     {"defect_direct_max", defects.direct_max},
                     {"defect_indirect_max", optional_number(defects.indirect_max)},
                     {"singular_steps", defects.singular},
                     {"files", files_json(res.files)},
                     {"wall_time_seconds", seconds_since(start)}};
  write_file_atomic(res.files[1], res.summary.dump(2) + "\n");
  return res;
}

CommandResult cmd_compare(const RunConfig& cfg) {
  validate(cfg);
  const auto start = Clock::now();
  const Method methods[] = {Method::midpoint_direct, Method::midpoint_indirect, Method::rk4};
  std::vector<RunSpec> runs;
  for (Method m : methods)
    runs.push_back({cfg.system, cfg.initial, cfg.tau, cfg.n_steps, m, cfg.epsilon});
  const std::vector<Trajectory> trs = integrate_batch(runs);

  std::vector<EnergyReport> reports;
  for (const Trajectory& tr : trs) reports.push_back(energy_report(tr));

  const std::size_t n = cfg.system.dof();
  std::ostringstream os;
  os << "step,t";
  for (Method m : methods) {
    const std::string pre = std::string(to_string(m)) + ".";
    append_state_header(os, n, pre);
    os << ',' << pre << "E," << pre << "hhat";
  }
  os << '\n';

  double max_disc = 0.0;
  double max_disc_regular = 0.0;
  for (std::size_t k = 0; k <= cfg.n_steps; ++k) {
    os << k << ',' << format_double(reports[0].series[k].t);
    for (std::size_t m = 0; m < trs.size(); ++m) {
      append_state(os, state_at(trs[m], k));
      os << ',' << format_double(reports[m].series[k].energy) << ','
         << format_double(reports[m].series[k].hhat);
    }
    os << '\n';
    const Vector a = state_at(trs[0], k).stacked();
    const Vector b = state_at(trs[1], k).stacked();
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    max_disc = std::max(max_disc, d);
    if (k == 0 || !trs[1].steps[k - 1].singular) max_disc_regular = std::max(max_disc_regular, d);
  }

  CommandResult res;
  res.files = {artifact(cfg, ".compare.csv"), artifact(cfg, ".compare.json")};
  write_file_atomic(res.files[0], os.str());

  json per_method = json::object();
  for (std::size_t m = 0; m < trs.size(); ++m) {
    per_method[std::string(to_string(methods[m]))] =
        json{{"energy", energy_json(reports[m])}, {"period", period_json(trs[m])}};
  }
  res.summary = json{{"command", "compare"},
                     {"label", cfg.system.label()},
                     {"tau", cfg.tau},
                     {"n_steps", cfg.n_steps},
                     {"epsilon", cfg.epsilon},
                     {"max_direct_indirect_discrepancy", max_disc},
                     {"max_direct_indirect_discrepancy_nonsingular", max_disc_regular},
                     {"indirect_singular_steps", reports[1].singular_steps},
                     {"methods", per_method},
                     {"files", files_json(res.files)},
                     {"threads", parallel_threads()},
                     {"wall_time_seconds", seconds_since(start)}};
  write_file_atomic(res.files[1], res.summary.dump(2) + "\n");
  return res;
}

CommandResult cmd_convergence(const RunConfig& cfg, std::size_t levels, double t_final) {
  validate(cfg);
  const auto start = Clock::now();
  ConvergenceTable table;
  try {
    table = convergence_study(cfg.system, cfg.initial, cfg.tau, levels, t_final, cfg.method,
                              cfg.epsilon);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  std::ostringstream os;
  os << "tau,error,order\n";
  json rows = json::array();
  for (const ConvergenceRow& r : table.rows) {
    os << format_double(r.tau) << ',' << format_double(r.error) << ',' << csv_optional(r.order)
       << '\n';
    rows.push_back(json{{"tau", r.tau}, {"error", r.error}, {"order", optional_number(r.order)}});
  }

  CommandResult res;
  res.files = {artifact(cfg, ".convergence.csv"), artifact(cfg, ".convergence.json")};
  write_file_atomic(res.files[0], os.str());
  res.summary = json{{"command", "convergence"},
                     {"label", cfg.system.label()},
                     {"method", std::string(to_string(cfg.method))},
                     {"t_final", t_final},
                     {"reference", table.reference},
                     {"rows", rows},
                     {"files", files_json(res.files)},
                     {"wall_time_seconds", seconds_since(start)}};
  write_file_atomic(res.files[1], res.summary.dump(2) + "\n");
  return res;
}

CommandResult cmd_check_symplectic(const RunConfig& cfg, std::ostream& report) {
  validate(cfg);
  const auto start = Clock::now();
  const Trajectory tr = integrate(cfg.system, cfg.initial, cfg.tau, cfg.n_steps,
                                  Method::midpoint_direct, cfg.epsilon);
  const SymplecticForm form(cfg.system.dof());
  const FactorPair direct = direct_factors(cfg.system, cfg.tau);
  const double factor_defect_direct = quotient_symplectic_defect(direct.lhs, direct.rhs, form);

  std::ostringstream os;
  os << "step,t,defect_direct,defect_indirect,factor_defect_direct,factor_defect_indirect,"
        "singular\n";
  std::size_t regular = 0;
  double max_indirect = 0.0;
  double max_factor_indirect = 0.0;
  for (std::size_t k = 1; k <= tr.steps.size(); ++k) {
    const StepRecord& rec = tr.steps[k - 1];
    std::optional<double> factor_indirect;
    if (!rec.singular && rec.ktilde) {
      const FactorPair f = indirect_factors(cfg.system, *rec.ktilde, cfg.tau);
      factor_indirect = quotient_symplectic_defect(f.lhs, f.rhs, form);
      ++regular;
      max_indirect = std::max(max_indirect, rec.defect_indirect.value_or(0.0));
      max_factor_indirect = std::max(max_factor_indirect, *factor_indirect);
    }
    os << k << ',' << format_double(rec.state.t) << ',' << format_double(rec.defect_direct) << ','
       << csv_optional(rec.defect_indirect) << ',' << format_double(factor_defect_direct) << ','
       << csv_optional(factor_indirect) << ',' << (rec.singular ? 1 : 0) << '\n';
  }

  const double defect_direct = tr.steps.front().defect_direct;
  std::string verdict_direct;
  if (defect_direct <= kSymplecticTolerance)
    verdict_direct = "symplectic";
  else if (defect_direct >= kUnsymplecticThreshold)
    verdict_direct = "unsymplectic";
  else
    verdict_direct = "indeterminate";

  std::string verdict_indirect;
  if (regular == 0)
    verdict_indirect = "insufficient data";
  else if (max_indirect <= kSymplecticTolerance)
    verdict_indirect = "symplectic";
  else
    verdict_indirect = "unsymplectic";

  report << "F1 (direct): " << verdict_direct << " (defect " << format_double(defect_direct)
         << ", factor test " << format_double(factor_defect_direct) << ")\n";
  report << "F2 (indirect): " << verdict_indirect;
  if (regular > 0)
    report << " (max defect " << format_double(max_indirect) << ", max factor test "
           << format_double(max_factor_indirect) << ", " << regular << " of " << tr.steps.size()
           << " steps)";
  else
    report << " (all " << tr.steps.size() << " steps singular)";
  report << '\n';

  CommandResult res;
  res.files = {artifact(cfg, ".symplectic.csv"), artifact(cfg, ".symplectic.json")};
  write_file_atomic(res.files[0], os.str());
  res.summary =
      json{{"command", "check-symplectic"},
           {"label", cfg.system.label()},
           {"tau", cfg.tau},
           {"n_steps", cfg.n_steps},
           {"direct", {{"verdict", verdict_direct},
                       {"defect", defect_direct},
                       {"factor_defect", factor_defect_direct}}},
           {"indirect", {{"verdict", verdict_indirect},
                         {"regular_steps", regular},
                         {"singular_steps", tr.steps.size() - regular},
                         {"max_defect", regular ? json(max_indirect) : json(nullptr)},
                         {"max_factor_defect", regular ? json(max_factor_indirect) : json(nullptr)}}},
           {"files", files_json(res.files)},
           {"wall_time_seconds", seconds_since(start)}};
  write_file_atomic(res.files[1], res.summary.dump(2) + "\n");
  return res;
}

// --- command line ------------------------------------------------------------

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<double> tau;
  std::optional<std::size_t> steps;
  std::optional<std::string> method;
  std::optional<double> epsilon;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)")->required();
  cmd->add_option("--out", o.out, "Output prefix");
  cmd->add_option("--tau", o.tau, "Step size");
  cmd->add_option("--steps", o.steps, "Number of steps");
  cmd->add_option("--method", o.method, "midpoint_direct | midpoint_indirect | rk4");
  cmd->add_option("--epsilon", o.epsilon, "Equivalent-stiffness guard");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = load_config(o.config, false);
  if (o.out) cfg.output_prefix = *o.out;
  if (o.tau) cfg.tau = *o.tau;
  if (o.steps) cfg.n_steps = *o.steps;
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (o.method) {
    try {
      cfg.method = parse_method(*o.method);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  // An explicit step override redefines the horizon.
  if (o.tau || o.steps) cfg.horizon.reset();
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), o.config);
  }
  return cfg;
}

int emit_error(std::ostream& err, const std::string& kind, const std::string& message,
               const std::string& path, int code) {
  json e{{"kind", kind}, {"message", message}};
  if (!path.empty()) e["path"] = path;
  err << json{{"error", e}}.dump() << '\n';
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-centered integration of damped linear systems"};
  app.require_subcommand(1);

  Overrides run_o, cmp_o, conv_o, sym_o;
  std::size_t levels = 4;
  std::optional<double> t_final;

  auto* run = app.add_subcommand("run", "Integrate one trajectory");
  add_common(run, run_o);
  auto* cmp = app.add_subcommand("compare", "Direct, indirect and RK4 on the same config");
  add_common(cmp, cmp_o);
  auto* conv = app.add_subcommand("convergence", "Step-halving convergence ladder");
  add_common(conv, conv_o);
  conv->add_option("--levels", levels, "Ladder rows (tau, tau/2, ...)")->check(CLI::PositiveNumber);
  conv->add_option("--t-final", t_final, "Final time (default: t0 + tau * steps)");
  auto* sym = app.add_subcommand("check-symplectic", "Symplectic defects of both transitions");
  add_common(sym, sym_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return emit_error(err, "usage", e.what(), "", 2);
  }

  try {
    CommandResult res;
    if (run->parsed()) {
      res = cmd_run(resolve(run_o));
    } else if (cmp->parsed()) {
      res = cmd_compare(resolve(cmp_o));
    } else if (conv->parsed()) {
      const RunConfig cfg = resolve(conv_o);
      const double tf = t_final.value_or(
          cfg.initial.t + cfg.tau * static_cast<double>(cfg.n_steps));
      res = cmd_convergence(cfg, levels, tf);
    } else {
      res = cmd_check_symplectic(resolve(sym_o), out);
    }
    for (const auto& f : res.files) out << "wrote " << f.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    return emit_error(err, "config", e.what(), e.path(), 2);
  } catch (const OutputError& e) {
    return emit_error(err, "io", e.what(), e.path(), 3);
  } catch (const IntegrationError& e) {
    return emit_error(err, "solver", e.what(), "", 4);
  } catch (const std::exception& e) {
    return emit_error(err, "internal", e.what(), "", 5);
  }
}

}  // namespace dampsym
