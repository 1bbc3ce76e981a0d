#include "dampsym/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dampsym {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::midpoint_direct: return "midpoint_direct";
    case Method::midpoint_indirect: return "midpoint_indirect";
    case Method::rk4: return "rk4";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "midpoint_direct") return Method::midpoint_direct;
  if (name == "midpoint_indirect") return Method::midpoint_indirect;
  if (name == "rk4") return Method::rk4;
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected midpoint_direct, midpoint_indirect or rk4)");
}

namespace {

void require_step_args(const DampedLinearSystem& sys, const PhaseState& s, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (s.q.size() != sys.dof() || s.p.size() != sys.dof())
    throw DimensionError("state dimension does not match system");
}

// lhs = [[I, -a I], [a K + D, I]], rhs = [[I, a I], [-a K + D, I]] with a = tau/2.
FactorPair assemble_factors(const Matrix& k, const Matrix& d, double tau) {
  const std::size_t n = k.rows();
  const double a = 0.5 * tau;
  const Matrix id = Matrix::identity(n);
  FactorPair f{Matrix(2 * n, 2 * n), Matrix(2 * n, 2 * n)};
  f.lhs.set_block(0, 0, id);
  f.lhs.set_block(0, n, -a * id);
  f.lhs.set_block(n, 0, a * k + d);
  f.lhs.set_block(n, n, id);
  f.rhs.set_block(0, 0, id);
  f.rhs.set_block(0, n, a * id);
  f.rhs.set_block(n, 0, -a * k + d);
  f.rhs.set_block(n, n, id);
  return f;
}

// Solves lhs * dz = (rhs - lhs) * z = tau [p; -k q] for the increment, which
// keeps rounding proportional to |dz| rather than |z|.
PhaseState advance(const FactorPair& f, const Matrix& k, const PhaseState& s, double tau,
                   double t_next) {
  const std::size_t n = s.q.size();
  const Vector kq = k * std::span<const double>(s.q);
  Vector rhs(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] = tau * s.p[i];
    rhs[n + i] = -tau * kq[i];
  }
  const Vector dz = solve_linear(f.lhs, rhs);
  Vector next = s.stacked();
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] += dz[i];
    if (!std::isfinite(next[i])) throw std::runtime_error("implicit step produced a non-finite state");
  }
  return PhaseState::from_stacked(t_next, next);
}

Matrix quotient(const FactorPair& f) { return LuFactorization(f.lhs).solve(f.rhs); }

Vector rk4_rhs(const DampedLinearSystem& sys, std::span<const double> z) {
  const std::size_t n = sys.dof();
  const auto q = z.first(n);
  const auto p = z.subspan(n, n);
  const Vector kq = sys.stiffness() * q;
  const Vector cp = sys.damping() * p;
  Vector out(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = p[i];
    out[n + i] = -kq[i] - cp[i];
  }
  return out;
}

Vector rk4_advance(const DampedLinearSystem& sys, const Vector& z, double tau) {
  const std::size_t m = z.size();
  auto axpy = [m](const Vector& x, double h, const Vector& y) {
    Vector out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = x[i] + h * y[i];
    return out;
  };
  const Vector k1 = rk4_rhs(sys, z);
  const Vector k2 = rk4_rhs(sys, axpy(z, 0.5 * tau, k1));
  const Vector k3 = rk4_rhs(sys, axpy(z, 0.5 * tau, k2));
  const Vector k4 = rk4_rhs(sys, axpy(z, tau, k3));
  Vector out(m);
  for (std::size_t i = 0; i < m; ++i)
    out[i] = z[i] + tau / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

double work_increment(const DampedLinearSystem& sys, const PhaseState& from, const PhaseState& to,
                      double tau) {
  const std::size_t n = sys.dof();
  Vector dq(n);
  for (std::size_t i = 0; i < n; ++i) dq[i] = to.q[i] - from.q[i];
  return dot(dq, sys.damping() * std::span<const double>(dq)) / tau;
}

}  // namespace

FactorPair direct_factors(const DampedLinearSystem& sys, double tau) {
  return assemble_factors(sys.stiffness(), sys.damping(), tau);
}

FactorPair indirect_factors(const DampedLinearSystem& sys, const EquivalentStiffness& ks,
                            double tau) {
  const DampedLinearSystem sub = substituting_system(sys, ks);
  return assemble_factors(sub.stiffness(), sub.damping(), tau);
}

TransitionPair transition_matrices(const DampedLinearSystem& sys,
                                   const std::optional<EquivalentStiffness>& ks, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  const SymplecticForm j(sys.dof());
  TransitionPair out;
  out.direct = quotient(direct_factors(sys, tau));
  out.defect_direct = symplectic_defect(out.direct, j);
  if (ks) {
    out.indirect = quotient(indirect_factors(sys, *ks, tau));
    out.defect_indirect = symplectic_defect(*out.indirect, j);
  }
  return out;
}

PhaseState midpoint_direct_step(const DampedLinearSystem& sys, const PhaseState& s, double tau) {
  require_step_args(sys, s, tau);
  return advance(direct_factors(sys, tau), sys.stiffness(), s, tau, s.t + tau);
}

IndirectStep midpoint_indirect_step(const DampedLinearSystem& sys, const PhaseState& s, double tau,
                                    double guard) {
  require_step_args(sys, s, tau);
  IndirectStep out;
  out.probe = midpoint_direct_step(sys, s, tau);
  out.ktilde = equivalent_stiffness(sys, s.q, out.probe.q, tau, guard);
  out.singular = !out.ktilde.all_valid();
  if (out.singular) {
    out.state = out.probe;
    return out;
  }

  // K~ may be large and negative near a turning point, making the substituting
  // factor singular even though the probe satisfies its equations; such steps
  // are treated like invalid K~.
  try {
    const DampedLinearSystem sub = substituting_system(sys, out.ktilde);
    const FactorPair f = assemble_factors(sub.stiffness(), sub.damping(), tau);
    out.state = advance(f, sub.stiffness(), s, tau, out.probe.t);
    out.defect_indirect = symplectic_defect(quotient(f), SymplecticForm(sys.dof()));
  } catch (const SingularMatrixError&) {
    out.singular = true;
    out.state = out.probe;
    out.defect_indirect.reset();
    return out;
  }
  const Vector a = out.state.stacked();
  const Vector b = out.probe.stacked();
  for (std::size_t i = 0; i < a.size(); ++i)
    out.probe_discrepancy = std::max(out.probe_discrepancy, std::abs(a[i] - b[i]));
  return out;
}

PhaseState rk4_step(const DampedLinearSystem& sys, const PhaseState& s, double tau) {
  require_step_args(sys, s, tau);
  const Vector next = rk4_advance(sys, s.stacked(), tau);
  for (double v : next)
    if (!std::isfinite(v)) throw std::runtime_error("rk4 step produced a non-finite state");
  return PhaseState::from_stacked(s.t + tau, next);
}

Matrix rk4_transition(const DampedLinearSystem& sys, double tau) {
  const std::size_t m = 2 * sys.dof();
  Matrix f(m, m);
  for (std::size_t j = 0; j < m; ++j) {
    Vector e(m, 0.0);
    e[j] = 1.0;
    const Vector col = rk4_advance(sys, e, tau);
    for (std::size_t i = 0; i < m; ++i) f(i, j) = col[i];
  }
  return f;
}

IntegrationError::IntegrationError(std::size_t step, const std::string& cause)
    : std::runtime_error("step " + std::to_string(step) + ": " + cause), step_(step) {}

Trajectory integrate(const DampedLinearSystem& sys, const PhaseState& initial, double tau,
                     std::size_t n_steps, Method method, double guard) {
  if (n_steps == 0) throw std::invalid_argument("integrate: n_steps must be at least 1");
  require_step_args(sys, initial, tau);
  if (!(guard > 0.0)) throw std::invalid_argument("integrate: guard must be positive");

  Trajectory tr{sys, tau, initial, method, guard, {}};
  tr.steps.reserve(n_steps);

  const SymplecticForm form(sys.dof());
  double defect_direct = 0.0;
  try {
    defect_direct = method == Method::rk4
                        ? symplectic_defect(rk4_transition(sys, tau), form)
                        : transition_matrices(sys, std::nullopt, tau).defect_direct;
  } catch (const std::exception& e) {
    throw IntegrationError(1, e.what());
  }

  double cumulative_work = 0.0;
  PhaseState current = initial;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    StepRecord rec;
    try {
      if (method == Method::midpoint_indirect) {
        IndirectStep st = midpoint_indirect_step(sys, current, tau, guard);
        rec.state = std::move(st.state);
        rec.singular = st.singular;
        rec.defect_indirect = st.defect_indirect;
        rec.ktilde = std::move(st.ktilde);
      } else {
        rec.state = method == Method::rk4 ? rk4_step(sys, current, tau)
                                          : midpoint_direct_step(sys, current, tau);
        EquivalentStiffness ks = equivalent_stiffness(sys, current.q, rec.state.q, tau, guard);
        rec.singular = !ks.all_valid();
        if (!rec.singular) {
          try {
            rec.defect_indirect = transition_matrices(sys, ks, tau).defect_indirect;
          } catch (const SingularMatrixError&) {
            rec.singular = true;
          }
        }
        rec.ktilde = std::move(ks);
      }
    } catch (const std::exception& e) {
      throw IntegrationError(k, e.what());
    }
    rec.state.t = std::fma(static_cast<double>(k), tau, initial.t);
    rec.energy = total_energy(sys, rec.state);
    rec.work_increment = work_increment(sys, current, rec.state, tau);
    cumulative_work += rec.work_increment;
    rec.hhat = rec.energy + cumulative_work;
    rec.defect_direct = defect_direct;
    current = rec.state;
    tr.steps.push_back(std::move(rec));
  }
  return tr;
}

PhaseState propagate(const DampedLinearSystem& sys, const PhaseState& initial, double tau,
                     std::size_t n_steps, Method method, double guard) {
  require_step_args(sys, initial, tau);
  PhaseState current = initial;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    try {
      switch (method) {
        case Method::midpoint_direct: current = midpoint_direct_step(sys, current, tau); break;
        case Method::midpoint_indirect:
          current = midpoint_indirect_step(sys, current, tau, guard).state;
          break;
        case Method::rk4: current = rk4_step(sys, current, tau); break;
      }
    } catch (const std::exception& e) {
      throw IntegrationError(k, e.what());
    }
    current.t = std::fma(static_cast<double>(k), tau, initial.t);
  }
  return current;
}

}  // namespace dampsym
