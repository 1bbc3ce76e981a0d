#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dampsym/integrators.hpp"
#include "test_support.hpp"

using namespace dampsym;
using namespace dampsym::testing;

namespace {

// Scalar closed form of one time-centered step of q'' + c q' + k q = 0,
// obtained by eliminating the midpoint unknowns by hand.
ScalarState scalar_midpoint_oracle(double k, double c, double q, double p, double tau) {
  const double den = 4.0 + tau * tau * k + 2.0 * tau * c;
  return {(4.0 * q - tau * tau * k * q + 2.0 * tau * c * q + 4.0 * tau * p) / den,
          -(4.0 * tau * k * q + tau * tau * k * p + 2.0 * tau * c * p - 4.0 * p) / den};
}

double max_diff(const PhaseState& a, const PhaseState& b) {
  const Vector x = a.stacked();
  const Vector y = b.stacked();
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

// Residual of the time-centered equations for a claimed step s -> next.
double scheme_residual(const DampedLinearSystem& sys, const PhaseState& s, const PhaseState& next,
                       double tau) {
  const std::size_t n = sys.dof();
  Vector qm(n), dq(n);
  for (std::size_t i = 0; i < n; ++i) {
    qm[i] = 0.5 * (s.q[i] + next.q[i]);
    dq[i] = (next.q[i] - s.q[i]) / tau;
  }
  const Vector kq = sys.stiffness() * std::span<const double>(qm);
  const Vector cv = sys.damping() * std::span<const double>(dq);
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r = std::max(r, std::abs(dq[i] - 0.5 * (s.p[i] + next.p[i])));
    r = std::max(r, std::abs((next.p[i] - s.p[i]) / tau + kq[i] + cv[i]));
  }
  return r;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::midpoint_direct, Method::midpoint_indirect, Method::rk4})
    CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_method("euler"), std::invalid_argument);
}

TEST_CASE("midpoint_direct_step") {
  SUBCASE("bundled 1-D step matches the scalar closed form") {
    const auto oracle = scalar_midpoint_oracle(2.0, 0.05, 0.1, 0.2, 0.2);
    CHECK(oracle.q == doctest::Approx(0.554 / 4.1).epsilon(1e-15));
    CHECK(oracle.p == doctest::Approx(0.62 / 4.1).epsilon(1e-15));
    const auto s = midpoint_direct_step(paper_1d(), paper_1d_initial(), 0.2);
    CHECK(std::abs(s.q[0] - oracle.q) <= 1e-15);
    CHECK(std::abs(s.p[0] - oracle.p) <= 1e-15);
    CHECK(s.t == 0.2);
  }
  SUBCASE("satisfies the scheme equations for general n") {
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(trial % 4);
      const Matrix k = random_symmetric(n) + static_cast<double>(n) * Matrix::identity(n);
      const auto sys = make_system(k, 0.2 * random_matrix(n, n));
      const PhaseState s{0.0, random_vector(n), random_vector(n)};
      const auto next = midpoint_direct_step(sys, s, 0.1);
      CHECK(scheme_residual(sys, s, next, 0.1) <= 1e-13);
    }
  }
  SUBCASE("conserves energy exactly without damping") {
    const auto sys = make_system(Matrix::identity(3), Matrix(3, 3));
    const PhaseState s{0.0, {0.3, -0.2, 0.7}, {0.1, 0.5, -0.4}};
    const auto next = midpoint_direct_step(sys, s, 0.37);
    const double e0 = total_energy(sys, s);
    CHECK(std::abs(total_energy(sys, next) - e0) <= 1e-14 * e0);
  }
  SUBCASE("tiny step against the analytic solution") {
    const double tau = 1e-6;
    const auto next = midpoint_direct_step(paper_1d(), paper_1d_initial(), tau);
    const auto exact = analytic_1d(2.0, 0.05, 0.1, 0.2, tau);
    CHECK(std::abs(next.q[0] - exact.q) <= 1e-15);
    CHECK(std::abs(next.p[0] - exact.p) <= 1e-15);
  }
  SUBCASE("singular implicit factor is reported") {
    // 1 + (tau/2)^2 K + (tau/2) C = 0 with K = 0, C = -2/tau.
    const auto sys = make_system({{0.0}}, {{-10.0}});
    CHECK_THROWS_AS(midpoint_direct_step(sys, paper_1d_initial(), 0.2), SingularMatrixError);
  }
  SUBCASE("argument errors") {
    CHECK_THROWS_AS(midpoint_direct_step(paper_1d(), paper_1d_initial(), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(midpoint_direct_step(paper_2d(), paper_1d_initial(), 0.1), DimensionError);
  }
}

TEST_CASE("transition_matrices") {
  const SymplecticForm j1(1);
  SUBCASE("no damping collapses the two schemes") {
    const auto sys = make_system(Matrix{{3, 1}, {1, 2}}, Matrix(2, 2));
    const EquivalentStiffness zero{{0.0, 0.0}, {true, true}};
    const auto tp = transition_matrices(sys, zero, 0.2);
    REQUIRE(tp.indirect);
    CHECK(tp.direct == *tp.indirect);
    CHECK(tp.defect_direct <= 1e-12);
    CHECK(*tp.defect_indirect <= 1e-12);
  }
  SUBCASE("bundled 1-D system") {
    const double tau = 0.2;
    const auto probe = midpoint_direct_step(paper_1d(), paper_1d_initial(), tau);
    const auto ks = equivalent_stiffness(paper_1d(), Vector{0.1}, probe.q, tau);
    const auto tp = transition_matrices(paper_1d(), ks, tau);
    // For 2x2 matrices F^T J F = det(F) J, so the defect is sqrt(2) |det F - 1|
    // with det F = (1 + a^2 K - a C) / (1 + a^2 K + a C), a = tau / 2.
    const double expected = 0.013797205486566781;
    CHECK(tp.defect_direct == doctest::Approx(expected).epsilon(1e-12));
    CHECK(*tp.defect_indirect <= 1e-10);

    const auto f1 = direct_factors(paper_1d(), tau);
    CHECK(quotient_symplectic_defect(f1.lhs, f1.rhs, j1) ==
          doctest::Approx(0.014142135623730950).epsilon(1e-12));
    const auto f2 = indirect_factors(paper_1d(), ks, tau);
    CHECK(quotient_symplectic_defect(f2.lhs, f2.rhs, j1) <= 1e-12);
  }
  SUBCASE("bundled 2-D system") {
    const double tau = 0.2;
    const auto probe = midpoint_direct_step(paper_2d(), paper_2d_initial(), tau);
    const auto ks = equivalent_stiffness(paper_2d(), paper_2d_initial().q, probe.q, tau);
    REQUIRE(ks.all_valid());
    const auto tp = transition_matrices(paper_2d(), ks, tau);
    const SymplecticForm j2(2);
    CHECK(tp.defect_direct == doctest::Approx(0.0094818987487431183).epsilon(1e-12));
    CHECK(*tp.defect_indirect <= 1e-10);
    const auto f2 = indirect_factors(paper_2d(), ks, tau);
    CHECK(quotient_symplectic_defect(f2.lhs, f2.rhs, j2) <= 1e-12);
    const auto f1 = direct_factors(paper_2d(), tau);
    CHECK(quotient_symplectic_defect(f1.lhs, f1.rhs, j2) ==
          doctest::Approx(0.0097979589711327124).epsilon(1e-12));
  }
  SUBCASE("direct half only") {
    const auto tp = transition_matrices(paper_1d(), std::nullopt, 0.2);
    CHECK_FALSE(tp.indirect);
    CHECK_FALSE(tp.defect_indirect);
  }
}

TEST_CASE("midpoint_indirect_step") {
  SUBCASE("bundled 1-D step reproduces the direct step") {
    const auto direct = midpoint_direct_step(paper_1d(), paper_1d_initial(), 0.2);
    const auto st = midpoint_indirect_step(paper_1d(), paper_1d_initial(), 0.2);
    CHECK_FALSE(st.singular);
    CHECK(max_diff(st.state, direct) <= 1e-12);
    CHECK(st.probe_discrepancy <= 1e-12);
    REQUIRE(st.defect_indirect);
    CHECK(*st.defect_indirect <= 1e-10);
  }
  SUBCASE("undamped system is bit-identical to the direct step") {
    const auto sys = make_system(Matrix{{2, 0}, {0, 3}}, Matrix(2, 2));
    const PhaseState s{0.0, {0.3, -0.1}, {0.2, 0.4}};
    const auto st = midpoint_indirect_step(sys, s, 0.1);
    CHECK(st.state == midpoint_direct_step(sys, s, 0.1));
  }
  SUBCASE("step across a zero crossing is flagged singular") {
    // Choose p0 so the closed-form step lands exactly on q1 = -q0.
    const double tau = 0.2, q0 = 0.1;
    const double p0 = -q0 * (2.0 + tau * 0.05) / tau;
    const auto st = midpoint_indirect_step(paper_1d(), PhaseState{0.0, {q0}, {p0}}, tau);
    CHECK(st.singular);
    CHECK_FALSE(st.defect_indirect);
    CHECK(st.state == st.probe);
    CHECK(std::isfinite(st.state.q[0]));
    CHECK(std::isfinite(st.state.p[0]));
  }
  SUBCASE("random damped systems: states agree on regular steps") {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(trial % 4);
      const Matrix k = random_symmetric(n) + static_cast<double>(n) * Matrix::identity(n);
      const auto sys = make_system(k, 0.1 * random_matrix(n, n));
      const PhaseState s{0.0, random_vector(n), random_vector(n)};
      const auto st = midpoint_indirect_step(sys, s, 0.1);
      if (st.singular) continue;
      CHECK(max_diff(st.state, midpoint_direct_step(sys, s, 0.1)) <= 1e-12);
      CHECK(*st.defect_indirect <= 1e-10);
    }
  }
}

TEST_CASE("rk4_step") {
  SUBCASE("harmonic oscillator Taylor accuracy") {
    const auto sys = make_system({{1.0}}, {{0.0}});
    const auto s = rk4_step(sys, PhaseState{0.0, {1.0}, {0.0}}, 0.1);
    CHECK(std::abs(s.q[0] - std::cos(0.1)) <= 1e-7);
    CHECK(std::abs(s.p[0] + std::sin(0.1)) <= 1e-7);
  }
  SUBCASE("bundled 1-D system against the analytic solution") {
    PhaseState s = paper_1d_initial();
    for (int k = 0; k < 10000; ++k) s = rk4_step(paper_1d(), s, 1e-3);
    const auto exact = analytic_1d(2.0, 0.05, 0.1, 0.2, 10.0);
    CHECK(std::abs(s.q[0] - exact.q) <= 1e-10);
    CHECK(std::abs(s.p[0] - exact.p) <= 1e-10);
  }
  SUBCASE("linearity under power-of-two scaling is exact") {
    const PhaseState s = paper_2d_initial();
    const auto base = rk4_step(paper_2d(), s, 0.2);
    for (double alpha : {2.0, 0.5, -4.0}) {
      PhaseState scaled = s;
      for (double& v : scaled.q) v *= alpha;
      for (double& v : scaled.p) v *= alpha;
      const auto out = rk4_step(paper_2d(), scaled, 0.2);
      for (std::size_t i = 0; i < 2; ++i) {
        CHECK(out.q[i] == alpha * base.q[i]);
        CHECK(out.p[i] == alpha * base.p[i]);
      }
    }
  }
  SUBCASE("transition matrix reproduces the step") {
    const Matrix f = rk4_transition(paper_2d(), 0.2);
    const Vector z = paper_2d_initial().stacked();
    const Vector fz = f * std::span<const double>(z);
    const Vector step = rk4_step(paper_2d(), paper_2d_initial(), 0.2).stacked();
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(fz[i] - step[i]) <= 1e-16);
  }
}

TEST_CASE("dual oracle: analytic solution vs fine RK4 at t = 10") {
  PhaseState s = paper_1d_initial();
  for (int k = 0; k < 100000; ++k) s = rk4_step(paper_1d(), s, 1e-4);
  const auto exact = analytic_1d(2.0, 0.05, 0.1, 0.2, 10.0);
  CHECK(std::abs(s.q[0] - exact.q) <= 1e-8);
  CHECK(std::abs(s.p[0] - exact.p) <= 1e-8);
}

TEST_CASE("integrate") {
  SUBCASE("one step reproduces the single-step operation") {
    for (Method m : {Method::midpoint_direct, Method::midpoint_indirect, Method::rk4}) {
      const auto tr = integrate(paper_2d(), paper_2d_initial(), 0.2, 1, m);
      REQUIRE(tr.steps.size() == 1);
      const PhaseState expected = m == Method::rk4
                                      ? rk4_step(paper_2d(), paper_2d_initial(), 0.2)
                                  : m == Method::midpoint_direct
                                      ? midpoint_direct_step(paper_2d(), paper_2d_initial(), 0.2)
                                      : midpoint_indirect_step(paper_2d(), paper_2d_initial(), 0.2)
                                            .state;
      CHECK(tr.steps[0].state == expected);
    }
  }
  SUBCASE("record invariants") {
    const auto tr = integrate(paper_1d(), PhaseState{1.5, {0.1}, {0.2}}, 0.2, 250,
                              Method::midpoint_indirect);
    double work = 0.0;
    for (std::size_t k = 0; k < tr.steps.size(); ++k) {
      const StepRecord& r = tr.steps[k];
      CHECK(r.state.t == std::fma(static_cast<double>(k + 1), 0.2, 1.5));
      work += r.work_increment;
      CHECK(r.hhat == r.energy + work);
      CHECK(r.defect_indirect.has_value() == !r.singular);
      CHECK(r.ktilde.has_value());
    }
  }
  SUBCASE("midpoint energy is nonincreasing on the bundled 1-D run") {
    for (Method m : {Method::midpoint_direct, Method::midpoint_indirect}) {
      const auto tr = integrate(paper_1d(), paper_1d_initial(), 0.2, 250, m);
      double prev = tr.initial_energy();
      for (const StepRecord& r : tr.steps) {
        CHECK(r.energy <= prev);
        prev = r.energy;
      }
    }
  }
  SUBCASE("direct and indirect agree over 500 steps of the bundled 2-D system") {
    const auto a = integrate(paper_2d(), paper_2d_initial(), 0.2, 500, Method::midpoint_direct);
    const auto b = integrate(paper_2d(), paper_2d_initial(), 0.2, 500, Method::midpoint_indirect);
    double d = 0.0;
    for (std::size_t k = 0; k < 500; ++k) d = std::max(d, max_diff(a.steps[k].state, b.steps[k].state));
    CHECK(d <= 1e-11);
  }
  SUBCASE("failure reports the step index") {
    const auto sys = make_system({{0.0}}, {{-10.0}});
    try {
      integrate(sys, paper_1d_initial(), 0.2, 5, Method::midpoint_direct);
      FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
      CHECK(e.step() == 1);
    }
  }
  SUBCASE("argument errors") {
    CHECK_THROWS_AS(integrate(paper_1d(), paper_1d_initial(), 0.2, 0, Method::rk4),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate(paper_1d(), paper_1d_initial(), -0.2, 3, Method::rk4),
                    std::invalid_argument);
  }
}

TEST_CASE("property: discrete energy identity and ledger constancy") {
  for (const auto& [sys, z0] : {std::pair{paper_1d(), paper_1d_initial()},
                                std::pair{paper_2d(), paper_2d_initial()}}) {
    const auto tr = integrate(sys, z0, 0.2, 1000, Method::midpoint_direct);
    const double e0 = tr.initial_energy();
    double prev = e0;
    double max_residual = 0.0;
    double max_drift = 0.0;
    for (const StepRecord& r : tr.steps) {
      max_residual = std::max(max_residual, std::abs(r.energy - prev + r.work_increment));
      max_drift = std::max(max_drift, std::abs(r.hhat - e0));
      prev = r.energy;
    }
    CHECK(max_residual <= 1e-13 * std::max(1.0, e0));
    CHECK(max_drift <= 1e-10 * std::max(1.0, e0));
  }
}

TEST_CASE("property: F1 defect is bounded away from zero, F2 is symplectic") {
  for (const auto& [sys, z0] : {std::pair{paper_1d(), paper_1d_initial()},
                                std::pair{paper_2d(), paper_2d_initial()}}) {
    const auto tr = integrate(sys, z0, 0.2, 500, Method::midpoint_indirect);
    for (const StepRecord& r : tr.steps) {
      CHECK(r.defect_direct >= 1e-6);
      if (!r.singular) CHECK(*r.defect_indirect <= 1e-10);
    }
  }
}

TEST_CASE("second-order convergence of the direct scheme") {
  const auto exact = analytic_1d(2.0, 0.05, 0.1, 0.2, 10.0);
  double prev_err = 0.0;
  double tau = 0.1;
  for (int level = 0; level < 4; ++level, tau *= 0.5) {
    const auto steps = static_cast<std::size_t>(std::llround(10.0 / tau));
    const PhaseState s = propagate(paper_1d(), paper_1d_initial(), tau, steps,
                                   Method::midpoint_direct);
    const double err = std::max(std::abs(s.q[0] - exact.q), std::abs(s.p[0] - exact.p));
    if (level > 0) {
      const double order = std::log2(prev_err / err);
      CHECK(order == doctest::Approx(2.0).epsilon(0.05));
    }
    prev_err = err;
  }
}

TEST_CASE("conservative degeneration over 10^4 steps") {
  const auto sys = make_system(Matrix{{2, 0}, {0, 3}}, Matrix(2, 2));
  const PhaseState z0{0.0, {0.1, 0.2}, {0.1, 0.2}};
  const auto tr = integrate(sys, z0, 0.1, 10000, Method::midpoint_direct);
  const double e0 = tr.initial_energy();
  for (const StepRecord& r : tr.steps) REQUIRE(std::abs(r.energy - e0) <= 1e-13 * e0);
}

TEST_CASE("propagate matches the final state of integrate") {
  for (Method m : {Method::midpoint_direct, Method::midpoint_indirect, Method::rk4}) {
    const auto tr = integrate(paper_2d(), paper_2d_initial(), 0.2, 100, m);
    CHECK(propagate(paper_2d(), paper_2d_initial(), 0.2, 100, m) == tr.final_state());
  }
}
