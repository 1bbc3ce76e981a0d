#include "dampsym/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dampsym/parallel.hpp"

namespace dampsym {

EnergyReport energy_report(const Trajectory& tr) {
  EnergyReport rep;
  const DampedLinearSystem& sys = tr.system;
  const std::size_t n = sys.dof();
  rep.initial_energy = total_energy(sys, tr.initial);
  rep.series.reserve(tr.steps.size() + 1);
  rep.series.push_back({tr.initial.t, rep.initial_energy, 0.0, rep.initial_energy});

  const PhaseState* prev = &tr.initial;
  double prev_energy = rep.initial_energy;
  double work = 0.0;
  Vector dq(n);
  for (const StepRecord& rec : tr.steps) {
    const double energy = total_energy(sys, rec.state);
    for (std::size_t i = 0; i < n; ++i) dq[i] = rec.state.q[i] - prev->q[i];
    const double increment = dot(dq, sys.damping() * std::span<const double>(dq)) / tr.tau;
    work += increment;
    const double hhat = energy + work;
    rep.series.push_back({rec.state.t, energy, work, hhat});

    rep.max_hhat_drift = std::max(rep.max_hhat_drift, std::abs(hhat - rep.initial_energy));
    rep.max_identity_residual =
        std::max(rep.max_identity_residual, std::abs(energy - prev_energy + increment));
    if (energy > prev_energy) rep.energy_nonincreasing = false;
    if (increment < 0.0) rep.work_nondecreasing = false;
    if (rec.singular) ++rep.singular_steps;

    prev = &rec.state;
    prev_energy = energy;
  }
  rep.final_hhat_drift = rep.series.back().hhat - rep.initial_energy;
  return rep;
}

double period_from_samples(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size())
    throw DimensionError("period_from_samples: times and values differ in length");

  std::size_t sign_changes = 0;
  std::vector<double> upward;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const bool neg0 = values[i] < 0.0;
    const bool neg1 = values[i + 1] < 0.0;
    if (neg0 == neg1) continue;
    ++sign_changes;
    if (neg0) {
      const double frac = -values[i] / (values[i + 1] - values[i]);
      upward.push_back(times[i] + frac * (times[i + 1] - times[i]));
    }
  }
  if (sign_changes < 3 || upward.size() < 2) {
    std::ostringstream msg;
    msg << "insufficient oscillation: " << sign_changes << " sign change(s), " << upward.size()
        << " upward crossing(s)";
    throw InsufficientOscillationError(msg.str());
  }
  return (upward.back() - upward.front()) / static_cast<double>(upward.size() - 1);
}

double period_estimate(const Trajectory& tr, std::size_t component) {
  if (component >= tr.system.dof())
    throw DimensionError("period_estimate: component out of range");
  std::vector<double> t;
  std::vector<double> v;
  t.reserve(tr.steps.size() + 1);
  v.reserve(tr.steps.size() + 1);
  t.push_back(tr.initial.t);
  v.push_back(tr.initial.q[component]);
  for (const StepRecord& rec : tr.steps) {
    t.push_back(rec.state.t);
    v.push_back(rec.state.q[component]);
  }
  return period_from_samples(t, v);
}

std::size_t commensurate_steps(double t_final, double tau) {
  if (!(tau > 0.0) || !(t_final > 0.0))
    throw std::invalid_argument("commensurate_steps: horizon and tau must be positive");
  const double ratio = t_final / tau;
  const double k = std::round(ratio);
  if (k < 1.0 || std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "horizon " << t_final << " is not a multiple of tau " << tau;
    throw std::invalid_argument(msg.str());
  }
  return static_cast<std::size_t>(k);
}

ConvergenceReference convergence_reference(const DampedLinearSystem& sys, const PhaseState& z0,
                                           double tau_max, double t_final) {
  const double horizon = t_final - z0.t;
  if (sys.dof() == 1) {
    const double k = sys.stiffness()(0, 0);
    const double c = sys.damping()(0, 0);
    if (c * c < 4.0 * k) {
      const ScalarState s = analytic_1d(k, c, z0.q[0], z0.p[0], horizon);
      return {PhaseState{t_final, {s.q}, {s.p}}, "analytic underdamped solution"};
    }
  }
  const double tau_ref = tau_max / 1024.0;
  const std::size_t steps = commensurate_steps(horizon, tau_ref);
  PhaseState ref = propagate(sys, z0, tau_ref, steps, Method::rk4);
  std::ostringstream desc;
  desc.precision(17);
  desc << "rk4 with tau = " << tau_ref;
  return {std::move(ref), desc.str()};
}

namespace {

template <typename Propagator>
ConvergenceTable run_ladder(const DampedLinearSystem& sys, const PhaseState& z0, double tau_max,
                            std::size_t levels, double t_final, Method method, double guard,
                            Propagator&& propagate_all) {
  if (levels == 0) throw std::invalid_argument("convergence_study: levels must be at least 1");
  const double horizon = t_final - z0.t;

  std::vector<RunSpec> runs;
  runs.reserve(levels);
  double tau = tau_max;
  for (std::size_t i = 0; i < levels; ++i, tau *= 0.5)
    runs.push_back({sys, z0, tau, commensurate_steps(horizon, tau), method, guard});

  const ConvergenceReference ref = convergence_reference(sys, z0, tau_max, t_final);
  const std::vector<PhaseState> finals = propagate_all(std::span<const RunSpec>(runs));
  const Vector zref = ref.state.stacked();

  ConvergenceTable table{method, t_final, ref.description, {}};
  for (std::size_t i = 0; i < levels; ++i) {
    const Vector z = finals[i].stacked();
    double err = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) err = std::max(err, std::abs(z[j] - zref[j]));
    ConvergenceRow row{runs[i].tau, err, std::nullopt};
    if (i > 0) row.order = std::log2(table.rows.back().error / err);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace

ConvergenceTable convergence_study(const DampedLinearSystem& sys, const PhaseState& z0,
                                   double tau_max, std::size_t levels, double t_final,
                                   Method method, double guard) {
  return run_ladder(sys, z0, tau_max, levels, t_final, method, guard,
                    [](std::span<const RunSpec> r) { return propagate_batch(r); });
}

ConvergenceTable convergence_study_serial(const DampedLinearSystem& sys, const PhaseState& z0,
                                          double tau_max, std::size_t levels, double t_final,
                                          Method method, double guard) {
  return run_ladder(sys, z0, tau_max, levels, t_final, method, guard,
                    [](std::span<const RunSpec> r) { return propagate_batch_serial(r); });
}

}  // namespace dampsym
