#include <cmath>

#include "doctest.h"
#include "test_support.hpp"

using namespace slfforge;
using namespace slfforge::testing;

namespace {

const SlfSpec kQuad{SlfKind::quadratic_residual, 1.0};

// Unconstrained scalar problem built from closures; is_quadratic stays false
// so jumps take the numeric path.
ProblemSpec scalar_problem(std::function<double(double)> f, std::function<double(double)> g,
                           std::function<double(double)> h, double start) {
  ProblemSpec p;
  p.name = "scalar";
  p.n = 1;
  p.m = 0;
  p.cost = [f](const Vector& x) { return f(x[0]); };
  p.cost_grad = [g](const Vector& x) { return Vector::Constant(1, g(x[0])); };
  p.cost_hess = [h](const Vector& x) { return Matrix::Constant(1, 1, h(x[0])); };
  p.start_q1 = Vector::Constant(1, start);
  p.finalize();
  return p;
}

ControlVector identity_direction(const ProblemSpec& p, const LiftedState& q) {
  ControlSetSpec c;
  return solve_direction_quadratic(kQuad, c, p, q).u;
}

}  // namespace

TEST_SUITE("jump_engine") {
  TEST_CASE("initial guess") {
    CHECK(step_guess(0.5, -2.0) == 0.25);
    CHECK_THROWS_AS(step_guess(0.5, 0.0), ContractViolation);
    CHECK_THROWS_AS(step_guess(0.0, -1.0), ContractViolation);
  }

  TEST_CASE("phi on the two-variable QP is 3h^2 - 2h + 1/2") {
    const ProblemSpec p2 = problem("eqqp2");
    const LiftedState q = init_state(p2, vec({0, 0}), vec({0}));
    const ControlVector u{0.0, vec({1, 1}), vec({0})};
    for (double h : {0.0, 0.1, 0.25, 1.0 / 3.0, 0.7, 2.0}) {
      CHECK(phi_along(kQuad, p2, q, u, h) == doctest::Approx(3 * h * h - 2 * h + 0.5).epsilon(1e-14));
    }
    const JumpResult r = solve_jump(kQuad, p2, q, u);
    CHECK(r.mode == JumpMode::exact_quadratic);
    CHECK(r.h == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(r.s_next == doctest::Approx(1.0 / 6.0).epsilon(1e-14));

    JumpConfig numeric;
    numeric.allow_exact = false;
    const JumpResult rn = solve_jump(kQuad, p2, q, u, numeric);
    CHECK(rn.mode == JumpMode::cubic_backtrack);
    CHECK(rn.s_next < 0.5);
    CHECK(rn.s_next <= 0.5 + numeric.c1 * rn.h * -2.0);
  }

  TEST_CASE("sign jump on the scalar quadratic lands on the minimizer") {
    const ProblemSpec p1 = problem("quad1d");
    const LiftedState q = init_state(p1, vec({4}), Vector(0));
    const SlfSpec l1{SlfKind::l1_gradient, 1.0};
    const JumpResult r = solve_jump(l1, p1, q, {0.0, vec({-1}), Vector(0)});
    CHECK(r.h == 4.0);
    CHECK(r.s_next == 0.0);
    CHECK(r.q_next.q1[0] == 0.0);
    CHECK(r.backtracks == 0);
  }

  TEST_CASE("jump rejects a non-descent control") {
    const ProblemSpec p1 = problem("quad1d");
    const LiftedState q = init_state(p1, vec({4}), Vector(0));
    CHECK_THROWS_AS(solve_jump(kQuad, p1, q, {0.0, vec({1}), Vector(0)}), ContractViolation);
  }

  TEST_CASE("evaluator failing everywhere off the start is a line failure") {
    const ProblemSpec p = scalar_problem(
        [](double x) {
          if (x != 1.0) throw std::domain_error("outside the domain");
          return 0.5;
        },
        [](double x) { return x; }, [](double) { return 1.0; }, 1.0);
    const LiftedState q = init_state(p, vec({1}), Vector(0));
    CHECK_THROWS_AS(solve_jump(kQuad, p, q, identity_direction(p, q)), LineFailure);
  }

  TEST_CASE("unbounded decrease is a line failure") {
    // f = -log x: the gradient fades as x grows, so S keeps falling.
    const ProblemSpec p = scalar_problem(
        [](double x) {
          if (!(x > 0.0)) throw std::domain_error("log of a nonpositive number");
          return -std::log(x);
        },
        [](double x) { return -1.0 / x; }, [](double x) { return 1.0 / (x * x); }, 1.0);
    const LiftedState q = init_state(p, vec({1}), Vector(0));
    const ControlVector u = identity_direction(p, q);
    CHECK(u.u1[0] == 1.0);
    CHECK_THROWS_AS(solve_jump(kQuad, p, q, u), LineFailure);
    JumpConfig full;
    full.full_minimization = true;
    CHECK_THROWS_AS(solve_jump(kQuad, p, q, u, full), LineFailure);
  }

  TEST_CASE("backtracking from a domain edge") {
    // Domain x > 0; the first probe overshoots into x < 0.
    const ProblemSpec p = scalar_problem(
        [](double x) {
          if (!(x > 0.0)) throw std::domain_error("outside the domain");
          return x - std::log(x);
        },
        [](double x) { return 1.0 - 1.0 / x; }, [](double x) { return 1.0 / (x * x); }, 0.2);
    const LiftedState q = init_state(p, vec({0.2}), Vector(0));
    const ControlVector u{0.0, vec({4.0}), Vector(0)};
    const JumpResult r = solve_jump(kQuad, p, q, u);
    CHECK(r.s_next < slf_value(kQuad, p, q));
    CHECK(r.q_next.q1[0] > 0.0);
  }

  TEST_CASE("map examples") {
    const ProblemSpec p2 = problem("eqqp2");
    const LiftedState q = init_state(p2, vec({0, 0}), vec({0}));
    const LiftedState next = apply_map(p2, q, {0.0, vec({1, 1}), vec({3})}, 1.0 / 3.0);
    CHECK(next.q1.isApprox(vec({1.0 / 3.0, 1.0 / 3.0})));
    CHECK(next.q2[0] == doctest::Approx(1.0));
    CHECK(next.q3.isApprox(vec({-4.0 / 3.0, -4.0 / 3.0})));
    CHECK(next.q4[0] == doctest::Approx(-1.0 / 3.0));
    CHECK(hypersurface_residual(p2, next) == 0.0);
    CHECK_THROWS_AS(apply_map(p2, q, {0.0, vec({1, 1}), vec({0})}, -1.0), ContractViolation);

    const ProblemSpec p1 = problem("quad1d");
    LiftedState qa = init_state(p1, vec({2}), Vector(0), true);
    qa.v1 = vec({-1});
    const LiftedState na = apply_map(p1, qa, {0.0, vec({0.5}), Vector(0)}, 2.0);
    CHECK((*na.v1)[0] == 0.0);
    CHECK(na.q1[0] == 2.0);
    const LiftedState nb = apply_map(p1, qa, {0.0, vec({0.0}), Vector(0)}, 1.0);
    CHECK(nb.q1[0] == 1.0);
    CHECK(nb.q3[0] == -1.0);
  }

  TEST_CASE("hermite minimizer is exact on quadratics and cubics") {
    // phi = 1 - 2h + 3h^2: minimizer 1/3.
    const auto quad = [](double h) { return 1 - 2 * h + 3 * h * h; };
    CHECK(hermite_minimizer(1, -2, 1.0, quad(1.0), 0.0, kInf) == doctest::Approx(1.0 / 3.0));
    Rng rng(41);
    for (int t = 0; t < 50; ++t) {
      // phi = f0 + g0 h + B h^2 + A h^3 with A > 0, g0 < 0.
      const double f0 = rng.uniform(-1, 1), g0 = -rng.uniform(0.1, 2);
      const double B = rng.uniform(-1, 1), A = rng.uniform(0.1, 2);
      const auto cubic = [&](double h) { return f0 + g0 * h + B * h * h + A * h * h * h; };
      const double a = rng.uniform(0.2, 1.0), b = rng.uniform(1.5, 3.0);
      const double expected = (-B + std::sqrt(B * B - 3 * A * g0)) / (3 * A);
      CHECK(hermite_minimizer(f0, g0, a, cubic(a), b, cubic(b)) ==
            doctest::Approx(expected).epsilon(1e-8));
    }
  }

  TEST_CASE("property: accepted jumps decrease S and stay on the surface") {
    Rng rng(42);
    ControlSetSpec c;
    for (const auto& name : registry_names()) {
      const ProblemSpec p = problem(name);
      CAPTURE(name);
      for (int t = 0; t < 20; ++t) {
        const LiftedState q = init_state(p, rng.vector(p.n, -1.5, 1.5), rng.vector(p.m));
        if (slf_value(kQuad, p, q) == 0.0) continue;
        for (MetricRecipe m : {MetricRecipe::identity, MetricRecipe::sqp}) {
          c.metric = m;
          DirectionResult d;
          try {
            d = solve_direction_quadratic(kQuad, c, p, q);
          } catch (const SingularityError&) {
            continue;
          }
          const JumpResult r = solve_jump(kQuad, p, q, d.u);
          CHECK(r.s_next < slf_value(kQuad, p, q));
          CHECK(r.h > 0.0);
          CHECK(hypersurface_residual(p, r.q_next) <= 1e-12);
        }
      }
    }
  }

  TEST_CASE("property: exact and full-minimization jumps agree on QPs") {
    Rng rng(43);
    JumpConfig full;
    full.full_minimization = true;
    ControlSetSpec c;
    for (int t = 0; t < 40; ++t) {
      const int n = rng.integer(1, 5), m = rng.integer(0, n);
      const ProblemSpec p = random_equality_qp(rng, n, m);
      const LiftedState q = init_state(p, rng.vector(n, -2, 2), rng.vector(m, -2, 2));
      const ControlVector u = solve_direction_quadratic(kQuad, c, p, q).u;
      const JumpResult ex = solve_jump(kQuad, p, q, u);
      const JumpResult fm = solve_jump(kQuad, p, q, u, full);
      CHECK(ex.mode == JumpMode::exact_quadratic);
      CHECK(fm.mode == JumpMode::full_minimization);
      CHECK(std::abs(ex.h - fm.h) <= 1e-8 * std::max(1.0, ex.h));
      // The exact jump is the minimizer: no grid point does better.
      for (double s = 0.0; s <= 3.0; s += 0.05) {
        CHECK(ex.s_next <= phi_along(kQuad, p, q, u, s * ex.h) + 1e-14);
      }
    }
  }
}
