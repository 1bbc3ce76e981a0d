#pragma once

// Post-hoc analysis of trajectories: the energy / dissipated-work ledger,
// zero-crossing period estimates and step-size convergence tables.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dampsym/integrators.hpp"

namespace dampsym {

struct EnergySample {
  double t = 0.0;
  double energy = 0.0;
  double work_cumulative = 0.0;
  double hhat = 0.0;
};

struct EnergyReport {
  /// One sample per state, the initial state first.
  std::vector<EnergySample> series;
  double initial_energy = 0.0;
  /// max_k |hhat_k - E_0|.
  double max_hhat_drift = 0.0;
  /// hhat_final - E_0, signed.
  double final_hhat_drift = 0.0;
  /// max_k |E_{k+1} - E_k + work_increment_k|.
  double max_identity_residual = 0.0;
  bool energy_nonincreasing = true;
  bool work_nondecreasing = true;
  std::size_t singular_steps = 0;
};

/// Rebuilds the ledger from the stored states; stored energies are not trusted.
EnergyReport energy_report(const Trajectory& tr);

class InsufficientOscillationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Mean spacing of upward zero crossings, each located by linear interpolation
/// between the bracketing samples. Needs at least three sign changes and two
/// upward crossings.
double period_from_samples(std::span<const double> times, std::span<const double> values);

double period_estimate(const Trajectory& tr, std::size_t component);

struct ConvergenceRow {
  double tau = 0.0;
  double error = 0.0;
  std::optional<double> order;
};

struct ConvergenceTable {
  Method method = Method::midpoint_direct;
  double t_final = 0.0;
  std::string reference;
  std::vector<ConvergenceRow> rows;
};

/// The reference final state used by convergence_study: the closed form for an
/// underdamped scalar system, otherwise RK4 at tau_max / 1024.
struct ConvergenceReference {
  PhaseState state;
  std::string description;
};
ConvergenceReference convergence_reference(const DampedLinearSystem& sys, const PhaseState& z0,
                                           double tau_max, double t_final);

/// Errors (phase-space max norm at t_final) for tau_max, tau_max/2, ... over
/// `levels` rows. The ladder levels run in parallel.
ConvergenceTable convergence_study(const DampedLinearSystem& sys, const PhaseState& z0,
                                   double tau_max, std::size_t levels, double t_final,
                                   Method method, double guard = kDefaultStiffnessGuard);

/// Serial reference for convergence_study.
ConvergenceTable convergence_study_serial(const DampedLinearSystem& sys, const PhaseState& z0,
                                          double tau_max, std::size_t levels, double t_final,
                                          Method method, double guard = kDefaultStiffnessGuard);

/// Number of steps of size tau that land on t_final; throws std::invalid_argument
/// when t_final is not an integer multiple of tau (relative tolerance 1e-9).
std::size_t commensurate_steps(double t_final, double tau);

}  // namespace dampsym
