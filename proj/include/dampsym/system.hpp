#pragma once

// The unit-mass damped linear model  q'' + C q' + K q = 0,  its energy, and the
// diagonal equivalent stiffness that trades the damping force along one step
// for a position-proportional force.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dampsym/linalg.hpp"

namespace dampsym {

/// Default relative guard for the equivalent-stiffness quotient.
inline constexpr double kDefaultStiffnessGuard = 1e-8;

class DampedLinearSystem {
public:
  std::size_t dof() const noexcept { return stiffness_.rows(); }
  const Matrix& stiffness() const noexcept { return stiffness_; }
  const Matrix& damping() const noexcept { return damping_; }
  const std::string& label() const noexcept { return label_; }

  /// C + C^T is positive semidefinite, so mechanical energy cannot grow.
  bool monotone_energy_certified() const noexcept { return monotone_energy_certified_; }
  bool undamped() const noexcept { return damping_.max_abs() == 0.0; }

  friend DampedLinearSystem make_system(Matrix stiffness, Matrix damping, std::string label);

private:
  DampedLinearSystem() = default;

  Matrix stiffness_;
  Matrix damping_;
  std::string label_;
  bool monotone_energy_certified_ = false;
};

/// Validates K (square, symmetric to 1e-12 relative) and C (same size).
/// Throws DimensionError or std::invalid_argument.
DampedLinearSystem make_system(Matrix stiffness, Matrix damping, std::string label = {});

/// One point of phase space at time t. Momenta equal velocities (unit mass).
struct PhaseState {
  double t = 0.0;
  Vector q;
  Vector p;

  /// z = [q, p].
  Vector stacked() const;
  static PhaseState from_stacked(double t, std::span<const double> z);

  friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

/// Diagonal of the equivalent stiffness matrix for one step. Entries whose
/// defining quotient was singular are flagged invalid and held at zero.
struct EquivalentStiffness {
  Vector diag;
  std::vector<bool> valid;

  bool all_valid() const;
  std::vector<std::size_t> invalid_indices() const;
};

/// Raised by substituting_system when some K~ entry is invalid.
class SingularStiffnessError : public std::runtime_error {
public:
  explicit SingularStiffnessError(std::vector<std::size_t> indices);
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

private:
  std::vector<std::size_t> indices_;
};

/// H = 1/2 p^T p + 1/2 q^T K q.
double total_energy(const DampedLinearSystem& sys, const PhaseState& s);

/// K~_ii = sum_j 2 C_ij (q1_j - q0_j) / (tau (q1_i + q0_i)).
/// Component i is invalid when |q1_i + q0_i| <= guard * max(|q1_i|, |q0_i|, 1e-300).
EquivalentStiffness equivalent_stiffness(const DampedLinearSystem& sys,
                                         std::span<const double> q_begin,
                                         std::span<const double> q_end, double tau,
                                         double guard = kDefaultStiffnessGuard);

/// The conservative system with stiffness K + K~ and no damping.
DampedLinearSystem substituting_system(const DampedLinearSystem& sys,
                                       const EquivalentStiffness& ks);

struct ScalarState {
  double q = 0.0;
  double p = 0.0;
};

/// Closed-form solution of the underdamped scalar oscillator
/// q'' + c q' + k q = 0 (requires c^2 < 4k).
ScalarState analytic_1d(double k, double c, double q0, double p0, double t);

}  // namespace dampsym
