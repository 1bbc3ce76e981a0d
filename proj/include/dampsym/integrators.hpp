#pragma once

// One-step schemes for the damped linear model and trajectory assembly.
//
// midpoint_direct    time-centered scheme applied to q'' + C q' + K q = 0
// midpoint_indirect  probe step, equivalent stiffness, then the time-centered
//                    scheme on the conservative substituting system
// rk4                classical fourth-order Runge-Kutta, the comparator

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dampsym/linalg.hpp"
#include "dampsym/system.hpp"

namespace dampsym {

enum class Method { midpoint_direct, midpoint_indirect, rk4 };

std::string_view to_string(Method m);
/// Throws std::invalid_argument for unknown names.
Method parse_method(std::string_view name);

/// The implicit step written as  lhs * z_{k+1} = rhs * z_k.
struct FactorPair {
  Matrix lhs;
  Matrix rhs;
};

/// Factors of the time-centered scheme on the damped system:
///   lhs = [[I, -tau/2 I], [tau/2 K + C, I]],  rhs = [[I, tau/2 I], [-tau/2 K + C, I]].
FactorPair direct_factors(const DampedLinearSystem& sys, double tau);

/// Factors of the time-centered scheme on the substituting system (stiffness K + K~).
/// Throws SingularStiffnessError if `ks` has invalid entries.
FactorPair indirect_factors(const DampedLinearSystem& sys, const EquivalentStiffness& ks,
                            double tau);

struct TransitionPair {
  Matrix direct;
  double defect_direct = 0.0;
  std::optional<Matrix> indirect;
  std::optional<double> defect_indirect;
};

/// Forms lhs^{-1} rhs column by column for both schemes and measures their
/// symplectic defects. The indirect half is omitted when `ks` is absent.
TransitionPair transition_matrices(const DampedLinearSystem& sys,
                                   const std::optional<EquivalentStiffness>& ks, double tau);

PhaseState midpoint_direct_step(const DampedLinearSystem& sys, const PhaseState& s, double tau);

struct IndirectStep {
  PhaseState state;
  PhaseState probe;
  EquivalentStiffness ktilde;
  bool singular = false;
  /// Symplectic defect of the substituting-system transition; absent on singular steps.
  std::optional<double> defect_indirect;
  /// max_i |state_i - probe_i| over z; zero on singular steps.
  double probe_discrepancy = 0.0;
};

IndirectStep midpoint_indirect_step(const DampedLinearSystem& sys, const PhaseState& s, double tau,
                                    double guard = kDefaultStiffnessGuard);

PhaseState rk4_step(const DampedLinearSystem& sys, const PhaseState& s, double tau);

/// The linear map of one RK4 step, assembled from the images of unit vectors.
Matrix rk4_transition(const DampedLinearSystem& sys, double tau);

struct StepRecord {
  PhaseState state;
  double energy = 0.0;
  /// (dq)^T C (dq) / tau, the energy dissipated over this step.
  double work_increment = 0.0;
  /// energy + cumulative work_increment.
  double hhat = 0.0;
  /// Defect of the method's own transition matrix (F1 for the midpoint schemes).
  double defect_direct = 0.0;
  std::optional<double> defect_indirect;
  bool singular = false;
  std::optional<EquivalentStiffness> ktilde;
};

struct Trajectory {
  DampedLinearSystem system;
  double tau = 0.0;
  PhaseState initial;
  Method method = Method::midpoint_direct;
  double guard = kDefaultStiffnessGuard;
  std::vector<StepRecord> steps;

  double initial_energy() const { return total_energy(system, initial); }
  const PhaseState& final_state() const { return steps.empty() ? initial : steps.back().state; }
};

/// A stepper failed; `step()` is the 1-based index of the failing step.
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(std::size_t step, const std::string& cause);
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

/// Applies `method` n_steps times. Times are initial.t + k * tau from integer k.
Trajectory integrate(const DampedLinearSystem& sys, const PhaseState& initial, double tau,
                     std::size_t n_steps, Method method, double guard = kDefaultStiffnessGuard);

/// Final state after n_steps of `method`, without per-step diagnostics.
PhaseState propagate(const DampedLinearSystem& sys, const PhaseState& initial, double tau,
                     std::size_t n_steps, Method method, double guard = kDefaultStiffnessGuard);

}  // namespace dampsym
