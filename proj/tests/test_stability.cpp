#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "doctest.h"
#include "test_support.hpp"

using namespace slfforge;
using namespace slfforge::testing;

namespace {

Matrix saddle(const Matrix& H, const Matrix& J) {
  const Eigen::Index n = H.rows(), m = J.rows();
  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = H;
  K.topRightCorner(n, m) = -J.transpose();
  K.bottomLeftCorner(m, n) = J;
  return K;
}

// Oracle: spectrum from the complex Schur form, flags recomputed by hand.
struct Brute {
  bool positive_stable;
  bool all_real_positive;
};

Brute brute(const Matrix& K) {
  Eigen::ComplexEigenSolver<Matrix> ces(K, false);
  const auto ev = ces.eigenvalues();
  double max_abs = 0.0, max_im = 0.0, min_re = kInf;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    max_abs = std::max(max_abs, std::abs(ev[i]));
    max_im = std::max(max_im, std::abs(ev[i].imag()));
    min_re = std::min(min_re, ev[i].real());
  }
  const bool stable = min_re > 1e-12 * max_abs;
  return {stable, stable && max_im <= 1e-10 * max_abs};
}

// Spectral norm of J H^{-1} J^T via an explicit inverse.
double schur_norm(const Matrix& H, const Matrix& J) {
  const Matrix SH = J * H.inverse() * J.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (SH + SH.transpose()));
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

ProblemSpec at_kkt(const std::string& name) {
  CorpusEntry e = corpus_entry(name);
  e.spec.start_q1 = e.kkt_q1;
  e.spec.start_q2 = e.kkt_q2;
  return e.spec;
}

}  // namespace

TEST_SUITE("stability_analysis") {
  TEST_CASE("diag(5, 5) with one constraint row") {
    Matrix J(1, 2);
    J << 1, 0;
    const SpectralReport r = analyze_matrices(5.0 * Matrix::Identity(2, 2), J);
    REQUIRE(r.schur_norm.has_value());
    CHECK(*r.schur_norm == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(*r.lambda_min == doctest::Approx(5.0));
    CHECK(r.benzi_simoncini_holds);
    CHECK(r.all_real_positive);
    CHECK(r.positive_stable);
    // lambda^2 - 5 lambda + 1 = 0 on the constrained block, 5 on the free one.
    REQUIRE(r.eigenvalues.size() == 3);
    CHECK(r.eigenvalues[0].real() == doctest::Approx((5 - std::sqrt(21.0)) / 2));
    CHECK(r.eigenvalues[1].real() == doctest::Approx((5 + std::sqrt(21.0)) / 2));
    CHECK(r.eigenvalues[2].real() == doctest::Approx(5.0));
    CHECK(r.reason.empty());
  }

  TEST_CASE("LP spectrum is on the imaginary axis") {
    const ProblemSpec p3 = problem("lp1");
    const SpectralReport r = analyze(p3, init_state(p3, vec({0}), vec({0})));
    REQUIRE(r.eigenvalues.size() == 2);
    CHECK(r.max_abs_real <= 1e-12);
    CHECK(std::abs(r.eigenvalues[0].imag()) == doctest::Approx(1.0));
    CHECK(std::abs(r.eigenvalues[1].imag()) == doctest::Approx(1.0));
    CHECK_FALSE(r.positive_stable);
    CHECK_FALSE(r.hessian_positive_definite);
    CHECK_FALSE(r.benzi_simoncini_holds);
    CHECK_FALSE(r.reason.empty());
  }

  TEST_CASE("unconstrained SPD Hessian is positive stable") {
    const ProblemSpec sq = problem("sepquad");
    const SpectralReport r = analyze(sq, init_state(sq, vec({0, 0, 0}), Vector(0)));
    CHECK(r.positive_stable);
    CHECK(r.all_real_positive);
    CHECK(r.benzi_simoncini_holds);
    CHECK(*r.schur_norm == 0.0);
  }

  TEST_CASE("rank-deficient Jacobian skips the Schur branch") {
    Matrix J(2, 2);
    J << 1, 1, 2, 2;
    const SpectralReport r = analyze_matrices(Matrix::Identity(2, 2), J);
    CHECK_FALSE(r.full_row_rank);
    CHECK_FALSE(r.benzi_simoncini_holds);
    CHECK_FALSE(r.schur_norm.has_value());
    CHECK(r.reason == "constraint Jacobian is rank deficient");
  }

  TEST_CASE("inequality problems are rejected") {
    const ProblemSpec ineq = make_quadratic_problem("ineq", Matrix::Identity(1, 1), vec({0}),
                                                    Matrix::Identity(1, 1), vec({0}),
                                                    vec({0}), vec({kInf}));
    CHECK_THROWS_AS(analyze(ineq, init_state(ineq, vec({1}), vec({0}))), ContractViolation);
  }

  TEST_CASE("property: flags agree with a brute-force eigen check") {
    Rng rng(61);
    for (int t = 0; t < 100; ++t) {
      const int n = rng.integer(1, 6), m = rng.integer(0, n);
      Matrix H = rng.gaussian(n, n);
      H = 0.5 * (H + H.transpose());
      if (t % 2 == 0) H = rng.spd(n, 0.1, 4.0);
      const Matrix J = rng.gaussian(m, n) * rng.uniform(0.01, 3.0);
      const SpectralReport r = analyze_matrices(H, J);
      const Brute b = brute(saddle(H, J));
      CHECK(r.positive_stable == b.positive_stable);
      CHECK(r.all_real_positive == b.all_real_positive);
      if (r.benzi_simoncini_holds) CHECK(r.all_real_positive);
    }
  }

  TEST_CASE("property: scaled random instances satisfy the real-spectrum theorem") {
    Rng rng(62);
    for (int t = 0; t < 50; ++t) {
      const int n = rng.integer(2, 8), m = rng.integer(1, std::min(n, 4));
      const Matrix H = rng.spd(n, 1.0, 6.0);
      Matrix J = rng.full_row_rank(m, n);
      const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues().minCoeff();
      J *= std::sqrt(0.99 * lmin / (4.0 * schur_norm(H, J)));
      CHECK(lmin >= 4.0 * schur_norm(H, J));
      const SpectralReport r = analyze_matrices(H, J);
      CHECK(r.benzi_simoncini_holds);
      CHECK(r.all_real_positive);
      CHECK(*r.schur_norm == doctest::Approx(schur_norm(H, J)).epsilon(1e-10));
      for (const auto& ev : r.eigenvalues) {
        CHECK(std::abs(ev.imag()) <= 1e-10 * std::abs(ev));
        CHECK(ev.real() > 0.0);
      }
    }
  }

  TEST_CASE("property: linear programs are never positive stable") {
    Rng rng(63);
    for (int t = 0; t < 50; ++t) {
      const int n = rng.integer(1, 8), m = rng.integer(1, n);
      const Matrix J = rng.gaussian(m, n);
      const SpectralReport r = analyze_matrices(Matrix::Zero(n, n), J);
      CHECK_FALSE(r.positive_stable);
      CHECK(r.max_abs_real <= 1e-12 * std::max(1.0, r.max_abs_imag));
    }
  }

  TEST_CASE("LP flow keeps its energy") {
    const FlowReport f = lp_divergence_demo(problem("lp1"), 10000, 1e-3);
    CHECK(f.initial_norm == doctest::Approx(std::sqrt(2.0)));
    CHECK(f.min_relative >= 0.999);
    CHECK(f.max_norm / f.initial_norm <= 1.001);
    CHECK(f.steps == 10000);
  }

  TEST_CASE("strictly convex QP flow decays") {
    const FlowReport f = ahu_flow_demo(problem("eqqp2"), 10000, 1e-3);
    CHECK(f.final_relative < 0.5);
    // Decay rate is Re lambda = 1/2: exp(-5) at t = 10.
    CHECK(f.final_relative == doctest::Approx(std::exp(-5.0)).epsilon(0.5));
  }

  TEST_CASE("zero residual is an equilibrium of the flow") {
    const FlowReport f = ahu_flow_demo(at_kkt("eqqp2"), 1000, 1e-3);
    CHECK(f.initial_norm == 0.0);
    CHECK(f.final_norm == 0.0);
  }

  TEST_CASE("flow demo preconditions") {
    CHECK_THROWS_AS(lp_divergence_demo(problem("eqqp2"), 10, 1e-3), ContractViolation);
    CHECK_THROWS_AS(ahu_flow_demo(problem("rosenbrock"), 10, 1e-3), ContractViolation);
    CHECK_THROWS_AS(ahu_flow_demo(problem("lp1"), 0, 1e-3), ContractViolation);
    CHECK_THROWS_AS(ahu_flow_demo(problem("lp1"), 10, 0.0), ContractViolation);
  }
}
