#include "dampsym/system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dampsym {

DampedLinearSystem make_system(Matrix stiffness, Matrix damping, std::string label) {
  if (!stiffness.square() || stiffness.rows() == 0)
    throw DimensionError("make_system: K must be a nonempty square matrix");
  if (damping.rows() != stiffness.rows() || damping.cols() != stiffness.cols())
    throw DimensionError("make_system: K and C must have the same size");
  if (!stiffness.all_finite() || !damping.all_finite())
    throw std::invalid_argument("make_system: non-finite coefficient");

  const std::size_t n = stiffness.rows();
  const double tol = 1e-12 * stiffness.max_abs();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(stiffness(i, j) - stiffness(j, i)) > tol) {
        std::ostringstream msg;
        msg << "make_system: K is not symmetric at (" << i << ", " << j << ")";
        throw std::invalid_argument(msg.str());
      }

  DampedLinearSystem sys;
  const Matrix sym = 0.5 * (damping + damping.transpose());
  const double smallest = symmetric_eigenvalues(sym).front();
  sys.monotone_energy_certified_ = smallest >= -1e-12 * std::max(1.0, sym.max_abs());
  sys.stiffness_ = std::move(stiffness);
  sys.damping_ = std::move(damping);
  sys.label_ = std::move(label);
  return sys;
}

Vector PhaseState::stacked() const {
  Vector z;
  z.reserve(q.size() + p.size());
  z.insert(z.end(), q.begin(), q.end());
  z.insert(z.end(), p.begin(), p.end());
  return z;
}

PhaseState PhaseState::from_stacked(double t, std::span<const double> z) {
  if (z.size() % 2 != 0) throw DimensionError("PhaseState::from_stacked: odd length");
  const std::size_t n = z.size() / 2;
  return PhaseState{t, Vector(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n)),
                    Vector(z.begin() + static_cast<std::ptrdiff_t>(n), z.end())};
}

bool EquivalentStiffness::all_valid() const {
  return std::all_of(valid.begin(), valid.end(), [](bool v) { return v; });
}

std::vector<std::size_t> EquivalentStiffness::invalid_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < valid.size(); ++i)
    if (!valid[i]) out.push_back(i);
  return out;
}

namespace {

std::string describe_indices(const std::vector<std::size_t>& idx) {
  std::ostringstream msg;
  msg << "equivalent stiffness singular at component(s)";
  for (std::size_t i : idx) msg << ' ' << i;
  return msg.str();
}

void require_state(const DampedLinearSystem& sys, const PhaseState& s) {
  if (s.q.size() != sys.dof() || s.p.size() != sys.dof())
    throw DimensionError("state dimension does not match system");
}

}  // namespace

SingularStiffnessError::SingularStiffnessError(std::vector<std::size_t> indices)
    : std::runtime_error(describe_indices(indices)), indices_(std::move(indices)) {}

double total_energy(const DampedLinearSystem& sys, const PhaseState& s) {
  require_state(sys, s);
  const Vector kq = sys.stiffness() * std::span<const double>(s.q);
  return 0.5 * dot(s.p, s.p) + 0.5 * dot(s.q, kq);
}

EquivalentStiffness equivalent_stiffness(const DampedLinearSystem& sys,
                                         std::span<const double> q_begin,
                                         std::span<const double> q_end, double tau, double guard) {
  const std::size_t n = sys.dof();
  if (q_begin.size() != n || q_end.size() != n)
    throw DimensionError("equivalent_stiffness: coordinate length mismatch");
  if (!(tau > 0.0)) throw std::invalid_argument("equivalent_stiffness: tau must be positive");

  Vector dq(n);
  for (std::size_t j = 0; j < n; ++j) dq[j] = q_end[j] - q_begin[j];
  const Vector damping_force = sys.damping() * std::span<const double>(dq);

  EquivalentStiffness ks{Vector(n, 0.0), std::vector<bool>(n, false)};
  for (std::size_t i = 0; i < n; ++i) {
    const double sum = q_end[i] + q_begin[i];
    const double scale = std::max({std::abs(q_end[i]), std::abs(q_begin[i]), 1e-300});
    if (std::abs(sum) > guard * scale) {
      ks.diag[i] = 2.0 * damping_force[i] / (tau * sum);
      ks.valid[i] = true;
    }
  }
  return ks;
}

DampedLinearSystem substituting_system(const DampedLinearSystem& sys,
                                       const EquivalentStiffness& ks) {
  if (ks.diag.size() != sys.dof() || ks.valid.size() != sys.dof())
    throw DimensionError("substituting_system: stiffness length mismatch");
  if (!ks.all_valid()) throw SingularStiffnessError(ks.invalid_indices());

  Matrix k = sys.stiffness();
  for (std::size_t i = 0; i < sys.dof(); ++i) k(i, i) += ks.diag[i];
  const std::size_t n = sys.dof();
  return make_system(std::move(k), Matrix(n, n), sys.label() + " (substituting)");
}

ScalarState analytic_1d(double k, double c, double q0, double p0, double t) {
  if (!(c * c < 4.0 * k))
    throw std::invalid_argument("analytic_1d: only the underdamped regime c^2 < 4k is supported");
  const double omega = std::sqrt(k - 0.25 * c * c);
  const double a = q0;
  const double b = (p0 + 0.5 * c * q0) / omega;
  const double decay = std::exp(-0.5 * c * t);
  const double cs = std::cos(omega * t);
  const double sn = std::sin(omega * t);
  const double osc = a * cs + b * sn;
  const double dosc = -a * omega * sn + b * omega * cs;
  return {decay * osc, decay * (dosc - 0.5 * c * osc)};
}

}  // namespace dampsym
