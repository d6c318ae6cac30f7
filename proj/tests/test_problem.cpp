#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_support.hpp"

using namespace slfforge;
using namespace slfforge::testing;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

ProblemSpec half_line_problem() {
  // g0 = x, g = x with 0 <= g.
  return make_quadratic_problem("half_line", Matrix::Zero(1, 1), vec({1.0}),
                                Matrix::Identity(1, 1), vec({0.0}), vec({0.0}),
                                vec({kInf}));
}

LiftedState manual_state(const ProblemSpec& p, double q4, double q2) {
  LiftedState q = init_state(p, vec({q4}), vec({q2}));
  return q;
}

}  // namespace

TEST_SUITE("problem_model") {
  TEST_CASE("lagrangian gradient on the two-variable QP") {
    const ProblemSpec p2 = problem("eqqp2");
    CHECK(lagrangian_grad(p2, 1.0, vec({0, 0}), vec({0})).isZero(0.0));
    const Vector g = lagrangian_grad(p2, 1.0, vec({0.5, 0.5}), vec({-0.5}));
    CHECK(g.isZero(1e-15));
  }

  TEST_CASE("lagrangian gradient on the LP") {
    const ProblemSpec p3 = problem("lp1");
    CHECK(lagrangian_grad(p3, 1.0, vec({0}), vec({0}))[0] == doctest::Approx(1.0));
  }

  TEST_CASE("dimension mismatch is a contract violation") {
    const ProblemSpec p2 = problem("eqqp2");
    CHECK_THROWS_AS(lagrangian_grad(p2, 1.0, vec({0}), vec({0})), ContractViolation);
    CHECK_THROWS_AS(lagrangian_hess(p2, 1.0, vec({0, 0}), vec({0, 0})), ContractViolation);
  }

  TEST_CASE("lagrangian hessian examples") {
    const ProblemSpec p2 = problem("eqqp2");
    CHECK(lagrangian_hess(p2, 1.0, vec({0.2, 0.9}), vec({3.0})).isApprox(Matrix::Identity(2, 2)));
    const ProblemSpec p3 = problem("lp1");
    CHECK(lagrangian_hess(p3, 1.0, vec({2}), vec({-1}))(0, 0) == 0.0);

    const ProblemSpec rb = problem("rosenbrock");
    const Vector x = vec({0.3, -0.4});
    CHECK(lagrangian_hess(rb, 2.0, x, Vector(0)) == 2.0 * rb.cost_hess(x));
  }

  TEST_CASE("lagrangian hessian symmetry over the corpus") {
    Rng rng(11);
    for (const auto& name : registry_names()) {
      const ProblemSpec p = problem(name);
      for (int t = 0; t < 20; ++t) {
        const Vector x = rng.vector(p.n, -2, 2);
        const Vector y = rng.vector(p.m, -2, 2);
        const Matrix raw = lagrangian_hess_raw(p, 1.0, x, y);
        const double scale = std::max(1.0, raw.cwiseAbs().maxCoeff());
        CHECK((raw - raw.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
        const Matrix sym = lagrangian_hess(p, 1.0, x, y);
        CHECK(sym == sym.transpose());
      }
    }
  }

  TEST_CASE("target residual at the QP KKT point and at the start") {
    const ProblemSpec p2 = problem("eqqp2");
    const TargetResidual at_kkt =
        target_residual(p2, init_state(p2, vec({0.5, 0.5}), vec({-0.5})));
    CHECK(at_kkt.total == 0.0);

    const TargetResidual at_start = target_residual(p2, init_state(p2, vec({0, 0}), vec({0})));
    CHECK(at_start.grad_norm == 0.0);
    CHECK(at_start.bound_violation == doctest::Approx(1.0));
    CHECK(at_start.total == doctest::Approx(1.0));
  }

  TEST_CASE("complementarity case analysis on an inequality row") {
    const ProblemSpec p = half_line_problem();
    CHECK_FALSE(p.is_equality_only);
    // Interior: multiplier must vanish.
    CHECK(target_residual(p, manual_state(p, 0.5, 0.3)).comp_violation ==
          doctest::Approx(0.3));
    // Active at the lower bound: nonpositive multiplier is admissible.
    CHECK(target_residual(p, manual_state(p, 0.0, -0.4)).comp_violation == 0.0);
    CHECK(target_residual(p, manual_state(p, 0.0, 0.2)).comp_violation ==
          doctest::Approx(0.2));
    // Within tolerance of the bound counts as active.
    CHECK(target_residual(p, manual_state(p, 5e-9, -0.4)).comp_violation == 0.0);
    // Bound violation.
    CHECK(target_residual(p, manual_state(p, -0.25, 0.0)).bound_violation ==
          doctest::Approx(0.25));
    // KKT of min x s.t. x >= 0 is x = 0, multiplier -1.
    CHECK(target_residual(p, manual_state(p, 0.0, -1.0)).total == 0.0);

    const ProblemSpec up = make_quadratic_problem("upper", Matrix::Zero(1, 1), vec({-1.0}),
                                                  Matrix::Identity(1, 1), vec({0.0}),
                                                  vec({-kInf}), vec({2.0}));
    CHECK(target_residual(up, manual_state(up, 2.0, 0.2)).comp_violation == 0.0);
    CHECK(target_residual(up, manual_state(up, 2.0, -0.2)).comp_violation ==
          doctest::Approx(0.2));
    CHECK(target_residual(up, manual_state(up, 2.0, 1.0)).total == 0.0);
  }

  TEST_CASE("target residual requires q0 > 0") {
    const ProblemSpec p2 = problem("eqqp2");
    LiftedState q = init_state(p2, vec({0, 0}), vec({0}));
    q.q0 = 0.0;
    CHECK_THROWS_AS(target_residual(p2, q), NormalizationError);
  }

  TEST_CASE("every corpus KKT point lies in the target set") {
    for (const auto& name : registry_names()) {
      CAPTURE(name);
      const CorpusEntry e = corpus_entry(name);
      const TargetResidual r = target_residual(e.spec, init_state(e.spec, e.kkt_q1, e.kkt_q2));
      CHECK(r.total <= 1e-14);
    }
  }

  TEST_CASE("derivative validation examples") {
    const ProblemSpec p2 = problem("eqqp2");
    const DerivativeReport r2 = validate_derivatives(p2, vec({0.3, 0.7}), 1e-6);
    CHECK(r2.passed);
    CHECK(r2.max_error <= 1e-4);

    const DerivativeReport r3 = validate_derivatives(problem("lp1"), vec({0.4}), 1e-6);
    CHECK(r3.max_error <= 1e-9);

    const DerivativeReport rb = validate_derivatives(problem("rosenbrock"), vec({-1.2, 1.0}), 1e-6);
    CHECK(rb.passed);
    CHECK(rb.max_error <= 1e-4);

    CHECK_THROWS_AS(validate_derivatives(p2, vec({0, 0}), 0.0), ContractViolation);
  }

  TEST_CASE("derivative validation catches a wrong gradient") {
    ProblemSpec p = problem("quad1d");
    p.cost_grad = [](const Vector& x) { return Vector(1.1 * x); };
    CHECK_FALSE(validate_derivatives(p, vec({2.0}), 1e-6).passed);
  }

  TEST_CASE("derivative validation passes on 100 random probes per corpus problem") {
    Rng rng(5);
    for (const auto& name : registry_names()) {
      CAPTURE(name);
      const ProblemSpec p = problem(name);
      for (int t = 0; t < 100; ++t) {
        CHECK(validate_derivatives(p, rng.vector(p.n, -2, 2), 1e-6).passed);
      }
    }
  }

  TEST_CASE("evaluator failures carry the probe point") {
    ProblemSpec p = problem("quad1d");
    p.cost = [](const Vector& x) -> double {
      if (x[0] > 1.0) throw std::domain_error("outside the domain");
      return 0.5 * x[0] * x[0];
    };
    try {
      validate_derivatives(p, vec({1.0}), 1e-3);
      FAIL("expected an evaluation error");
    } catch (const EvaluationError& e) {
      CHECK(std::string(e.what()).find("q1 = [1.00") != std::string::npos);
    }
    ProblemSpec nan_cost = problem("quad1d");
    nan_cost.cost = [](const Vector&) { return std::nan(""); };
    CHECK_THROWS_AS(eval_cost(nan_cost, vec({0.0})), EvaluationError);
  }

  TEST_CASE("finite-difference constraint hessian fallback") {
    const ProblemSpec p = problem("quadcirc");
    CHECK_FALSE(static_cast<bool>(p.cons_hess));
    const auto hs = eval_cons_hess(p, vec({0.3, -0.2}));
    REQUIRE(hs.size() == 1);
    CHECK((hs[0] - 2.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-6);
  }

  TEST_CASE("registry lookups") {
    const ProblemSpec p2 = load_problem("eqqp2");
    CHECK(p2.n == 2);
    CHECK(p2.m == 1);
    CHECK(p2.is_equality_only);
    CHECK(registry_names().size() >= 8);
    CHECK_THROWS_AS(load_problem("nosuch"), ProblemLoadError);
  }

  TEST_CASE("problem files") {
    const auto lp = write_temp("slfforge_lp.json",
                               R"({"n":1,"m":1,"Q":[[0]],"c":[1],"A":[[1]],"b":[1],"gL":[0],"gU":[0]})");
    const ProblemSpec p = load_problem(lp);
    CHECK(p.is_lp);
    CHECK(p.is_equality_only);
    CHECK(p.name == "slfforge_lp");

    const auto ineq = write_temp("slfforge_ineq.json",
                                 R"({"n":1,"m":1,"Q":[[1]],"c":[0],"A":[[1]],"b":[0],"gL":[0],"gU":["inf"]})");
    const ProblemSpec pi = load_problem(ineq);
    CHECK_FALSE(pi.is_equality_only);
    CHECK(std::isinf(pi.upper[0]));
    CHECK_FALSE(pi.is_lp);

    const auto uncon = write_temp("slfforge_uncon.json", R"({"n":2,"m":0,"Q":[[2,1],[1,2]],"c":[1,0]})");
    const ProblemSpec pu = load_problem(uncon);
    CHECK(pu.m == 0);
    CHECK(pu.cost_grad(vec({1, 1})).isApprox(vec({4, 3})));

    CHECK_THROWS_AS(load_problem(write_temp("slfforge_bad1.json", "{not json")), ProblemLoadError);
    CHECK_THROWS_AS(load_problem(write_temp("slfforge_bad2.json",
                                            R"({"n":2,"m":0,"Q":[[1,2],[0,1]],"c":[0,0]})")),
                    ProblemLoadError);
    CHECK_THROWS_AS(load_problem(write_temp("slfforge_bad3.json",
                                            R"({"n":1,"m":1,"Q":[[1]],"c":[0],"A":[[1]],"b":[0],"gL":["-inf"],"gU":["inf"]})")),
                    ProblemLoadError);
    CHECK_THROWS_AS(load_problem(write_temp("slfforge_bad4.json",
                                            R"({"n":1,"m":1,"Q":[[1]],"c":[0],"A":[[1]],"b":[0],"gL":[1],"gU":[0]})")),
                    ProblemLoadError);
    CHECK_THROWS_AS(load_problem(write_temp("slfforge_bad5.json", R"({"n":2,"m":0,"Q":[[1]],"c":[0,0]})")),
                    ProblemLoadError);
    CHECK_THROWS_AS(load_problem(write_temp("slfforge_bad6.json",
                                            R"({"n":1,"m":1,"Q":[[1]],"c":[0],"A":[[1]],"b":[0],"gL":["big"],"gU":[0]})")),
                    ProblemLoadError);
  }

  TEST_CASE("spec finalization rejects vacuous rows") {
    ProblemSpec p = problem("eqqp2");
    p.lower = vec({-kInf});
    p.upper = vec({kInf});
    CHECK_THROWS_AS(p.finalize(), ContractViolation);
  }
}
