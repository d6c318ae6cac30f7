#include "slfforge/stability.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "slfforge/dynamics.hpp"

namespace slfforge {

SpectralReport analyze_matrices(const Matrix& H, const Matrix& J) {
  detail::require(H.rows() == H.cols(), "analyze: H must be square");
  detail::require(J.rows() == 0 || J.cols() == H.cols(),
                  "analyze: J has the wrong number of columns");
  const Eigen::Index n = H.rows(), m = J.rows();

  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = H;
  if (m > 0) {
    K.topRightCorner(n, m) = -J.transpose();
    K.bottomLeftCorner(m, n) = J;
  }

  SpectralReport rep;
  Eigen::EigenSolver<Matrix> es(K, false);
  const auto ev = es.eigenvalues();
  double max_abs = 0.0;
  double min_real = kInf;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    rep.eigenvalues.push_back(ev[i]);
    max_abs = std::max(max_abs, std::abs(ev[i]));
    min_real = std::min(min_real, ev[i].real());
    rep.max_abs_real = std::max(rep.max_abs_real, std::abs(ev[i].real()));
    rep.max_abs_imag = std::max(rep.max_abs_imag, std::abs(ev[i].imag()));
  }
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](const auto& a, const auto& b) {
              return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
            });
  // Real parts within rounding of zero count as zero: a skew K_A (LP case)
  // otherwise reads as stable whenever the solver's noise lands positive.
  rep.positive_stable = min_real > kStabilityTol * max_abs;
  rep.all_real_positive = rep.positive_stable && rep.max_abs_imag <= 1e-10 * max_abs;

  const Matrix Hs = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> hes(Hs, Eigen::EigenvaluesOnly);
  rep.lambda_min = hes.eigenvalues().minCoeff();
  rep.hessian_positive_definite = *rep.lambda_min > 0.0;

  if (m > 0) {
    Eigen::JacobiSVD<Matrix> svd(J);
    const auto sv = svd.singularValues();
    const double smax = sv.maxCoeff();
    rep.full_row_rank = smax > 0.0 && sv.minCoeff() > 1e-10 * smax;
  } else {
    rep.full_row_rank = true;
  }

  if (!rep.hessian_positive_definite) {
    rep.reason = "Lagrangian Hessian is not positive definite";
  } else if (!rep.full_row_rank) {
    rep.reason = "constraint Jacobian is rank deficient";
  } else {
    Eigen::LLT<Matrix> llt(Hs);
    const Matrix SH = m > 0 ? Matrix(J * llt.solve(J.transpose())) : Matrix(0, 0);
    double norm = 0.0;
    if (m > 0) {
      Eigen::JacobiSVD<Matrix> svd(SH);
      norm = svd.singularValues()(0);
    }
    rep.schur_norm = norm;
    rep.benzi_simoncini_holds = *rep.lambda_min >= 4.0 * norm;
    if (!rep.benzi_simoncini_holds) rep.reason = "lambda_min < 4 |S_H|_2";
  }
  return rep;
}

SpectralReport analyze(const ProblemSpec& p, const LiftedState& q) {
  detail::require(p.is_equality_only, "analyze needs an equality-only problem");
  return analyze_matrices(lagrangian_hess(p, q.q0, q.q1, q.q2), eval_cons_jac(p, q.q1));
}

FlowReport ahu_flow_demo(const ProblemSpec& p, int steps, double dt) {
  detail::require(p.is_quadratic && p.is_equality_only,
                  "AHU flow demo needs an equality-constrained quadratic problem");
  detail::require(steps >= 1, "AHU flow demo: steps must be >= 1");
  detail::require(dt > 0.0, "AHU flow demo: dt must be > 0");

  const LiftedState q = init_state(p, p.start_q1, p.start_q2);
  Matrix K = Matrix::Zero(p.n + p.m, p.n + p.m);
  K.topLeftCorner(p.n, p.n) = lagrangian_hess(p, 1.0, q.q1, q.q2);
  if (p.m > 0) {
    const Matrix J = eval_cons_jac(p, q.q1);
    K.topRightCorner(p.n, p.m) = -J.transpose();
    K.bottomLeftCorner(p.m, p.n) = J;
  }
  const Matrix A = -K.transpose();

  Vector r(p.n + p.m);
  r << q.q3, q.q4 - p.lower;

  FlowReport rep;
  rep.steps = steps;
  rep.dt = dt;
  rep.initial_norm = r.norm();
  rep.min_norm = rep.max_norm = rep.initial_norm;
  for (int i = 0; i < steps; ++i) {
    const Vector k1 = A * r;
    const Vector k2 = A * (r + 0.5 * dt * k1);
    const Vector k3 = A * (r + 0.5 * dt * k2);
    const Vector k4 = A * (r + dt * k3);
    r += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double nr = r.norm();
    rep.min_norm = std::min(rep.min_norm, nr);
    rep.max_norm = std::max(rep.max_norm, nr);
  }
  rep.final_norm = r.norm();
  if (rep.initial_norm > 0.0) {
    rep.min_relative = rep.min_norm / rep.initial_norm;
    rep.final_relative = rep.final_norm / rep.initial_norm;
  }
  return rep;
}

FlowReport lp_divergence_demo(const ProblemSpec& p, int steps, double dt) {
  detail::require(p.is_lp, "LP divergence demo needs a linear program");
  return ahu_flow_demo(p, steps, dt);
}

}  // namespace slfforge
