#include "slfforge/slf.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace slfforge {

namespace {

double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Vector sign_vector(const Vector& v) { return v.unaryExpr(&sign0); }

/// Constraint part of the residual pair r = (q3, q4 - gL).
Vector constraint_residual(const ProblemSpec& p, const LiftedState& q) {
  return q.q4 - p.lower;
}

Vector residual_pair(const ProblemSpec& p, const LiftedState& q) {
  Vector r(p.n + p.m);
  r << q.q3, constraint_residual(p, q);
  return r;
}

/// Restriction of the control Jacobian to the (u1, u2) columns.
Matrix u12_columns(const ControlJacobian& cj) {
  return cj.B.rightCols(cj.n + cj.m);
}

/// LU condition estimate, capped by the pivot ratio: Eigen's estimator can
/// report a healthy value when a pivot is exactly zero.
double lu_rcond(const Eigen::PartialPivLU<Matrix>& lu) {
  const Vector piv = lu.matrixLU().diagonal().cwiseAbs();
  const double top = piv.maxCoeff();
  if (!(top > 0.0)) return 0.0;
  return std::min(lu.rcond(), piv.minCoeff() / top);
}

DirectionResult finish(const SlfSpec& s, const ProblemSpec& p,
                       const LiftedState& q, DirectionResult res) {
  res.ds = slf_directional_derivative(s, p, q, res.u);
  if (!(res.ds < 0.0)) {
    throw DescentFailure("direction does not decrease the SLF (DS = " +
                             std::to_string(res.ds) + ")",
                         res);
  }
  return res;
}

}  // namespace

double RateSpec::eval(double s) const {
  return kind == RateKind::linear ? kappa * s : kappa * std::pow(s, alpha);
}

void ControlSetSpec::validate() const {
  if (kind == ControlSetKind::quadratic_metric) {
    detail::require(delta > 0.0 && std::isfinite(delta),
                    "control set radius delta must be > 0");
    if (metric == MetricRecipe::explicit_matrix) {
      detail::require(explicit_w.rows() == explicit_w.cols() &&
                          explicit_w.rows() > 0,
                      "explicit metric must be square");
      const double asym = (explicit_w - explicit_w.transpose()).cwiseAbs().maxCoeff();
      detail::require(asym <= 1e-12 * std::max(1.0, explicit_w.cwiseAbs().maxCoeff()),
                      "explicit metric must be symmetric");
      Eigen::LLT<Matrix> llt(explicit_w);
      detail::require(llt.info() == Eigen::Success,
                      "explicit metric must be positive definite");
    }
  } else {
    detail::require(rate.kappa > 0.0, "rate gain kappa must be > 0");
    if (rate.kind == RateKind::bhat_bernstein) {
      detail::require(rate.alpha > 0.0 && rate.alpha < 1.0,
                      "rate exponent alpha must lie in (0, 1)");
    }
  }
}

const char* to_string(SlfKind kind) {
  switch (kind) {
    case SlfKind::quadratic_residual: return "quadratic_residual";
    case SlfKind::l1_gradient: return "l1_gradient";
    case SlfKind::velocity_augmented: return "velocity_augmented";
  }
  return "?";
}

const char* to_string(MetricRecipe metric) {
  switch (metric) {
    case MetricRecipe::identity: return "identity";
    case MetricRecipe::sqp: return "sqp";
    case MetricRecipe::ahu: return "ahu";
    case MetricRecipe::hessian: return "hessian";
    case MetricRecipe::explicit_matrix: return "explicit";
  }
  return "?";
}

const char* to_string(RateKind kind) {
  return kind == RateKind::linear ? "linear" : "bhat_bernstein";
}

void check_slf_compatible(const SlfSpec& s, const ProblemSpec& p,
                          const LiftedState& q) {
  switch (s.kind) {
    case SlfKind::quadratic_residual:
      if (!p.is_equality_only) {
        throw IncompatibleRecipe(
            "quadratic_residual SLF needs an equality-constrained problem");
      }
      break;
    case SlfKind::l1_gradient:
      if (p.m != 0) throw IncompatibleRecipe("l1_gradient SLF needs m = 0");
      break;
    case SlfKind::velocity_augmented:
      if (p.m != 0) throw IncompatibleRecipe("velocity_augmented SLF needs m = 0");
      if (!q.v1) {
        throw IncompatibleRecipe("velocity_augmented SLF needs an accelerated state");
      }
      break;
  }
}

double slf_value(const SlfSpec& s, const ProblemSpec& p, const LiftedState& q) {
  check_slf_compatible(s, p, q);
  switch (s.kind) {
    case SlfKind::quadratic_residual:
      return 0.5 * q.q3.squaredNorm() + 0.5 * constraint_residual(p, q).squaredNorm();
    case SlfKind::l1_gradient:
      return q.q3.lpNorm<1>();
    case SlfKind::velocity_augmented: {
      const Vector e = *q.v1 - s.coupling * q.q3;
      return 0.5 * q.q3.squaredNorm() + 0.5 * e.squaredNorm();
    }
  }
  return 0.0;
}

Vector slf_gradient(const SlfSpec& s, const ProblemSpec& p,
                    const LiftedState& q) {
  check_slf_compatible(s, p, q);
  const int n = p.n, m = p.m;
  const Eigen::Index rows = 1 + 2 * m + n + (q.v1 ? n : 0);
  Vector g = Vector::Zero(rows);
  switch (s.kind) {
    case SlfKind::quadratic_residual:
      g.segment(1 + m, n) = q.q3;
      g.segment(1 + m + n, m) = constraint_residual(p, q);
      break;
    case SlfKind::l1_gradient:
      g.segment(1 + m, n) = sign_vector(q.q3);
      break;
    case SlfKind::velocity_augmented: {
      const Vector e = *q.v1 - s.coupling * q.q3;
      g.segment(1 + m, n) = q.q3 - s.coupling * e;
      g.tail(n) = e;
      break;
    }
  }
  return g;
}

double slf_directional_derivative(const SlfSpec& s, const ProblemSpec& p,
                                  const LiftedState& q, const ControlVector& u) {
  check_slf_compatible(s, p, q);
  const StateRate rate = eval_field(p, q, u);
  if (s.kind == SlfKind::l1_gradient) {
    double ds = 0.0;
    for (int i = 0; i < p.n; ++i) {
      ds += q.q3[i] != 0.0 ? sign0(q.q3[i]) * rate.q3[i] : -std::abs(rate.q3[i]);
    }
    return ds;
  }
  return slf_gradient(s, p, q).dot(stack_active_rates(rate));
}

LinearRate slf_rate_terms(const SlfSpec& s, const ProblemSpec& p,
                          const LiftedState& q) {
  const ControlJacobian cj = control_jacobian(p, q);
  const Vector grad = slf_gradient(s, p, q);
  return {u12_columns(cj).transpose() * grad, grad.dot(cj.drift)};
}

Matrix assemble_kkt(const ProblemSpec& p, const LiftedState& q, bool symmetric) {
  const int n = p.n, m = p.m;
  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = lagrangian_hess(p, q.q0, q.q1, q.q2);
  if (m > 0) {
    const Matrix J = eval_cons_jac(p, q.q1);
    K.bottomLeftCorner(m, n) = J;
    K.topRightCorner(n, m) = symmetric ? Matrix(J.transpose()) : Matrix(-J.transpose());
  }
  return K;
}

DirectionResult solve_direction_quadratic(const SlfSpec& s,
                                          const ControlSetSpec& c,
                                          const ProblemSpec& p,
                                          const LiftedState& q) {
  detail::require(c.kind == ControlSetKind::quadratic_metric,
                  "solve_direction_quadratic needs a quadratic_metric set");
  c.validate();
  check_slf_compatible(s, p, q);
  if (s.kind == SlfKind::velocity_augmented) {
    throw IncompatibleRecipe("velocity_augmented SLF uses the rate-constrained set");
  }
  const int n = p.n;
  DirectionResult res;
  res.recipe = to_string(c.metric);

  if (c.metric == MetricRecipe::ahu) {
    if (s.kind != SlfKind::quadratic_residual) {
      throw IncompatibleRecipe("ahu metric needs the quadratic_residual SLF");
    }
    // W = K_A collapses the minimizer to u = sigma (q3, q4 - gL).
    res.sigma = std::sqrt(c.delta);
    res.u = ControlVector::from_stacked(res.sigma * residual_pair(p, q), n);
    return finish(s, p, q, res);
  }

  if (s.kind == SlfKind::l1_gradient) {
    if (c.metric != MetricRecipe::hessian) {
      throw IncompatibleRecipe("l1_gradient SLF is paired with the hessian metric");
    }
    const Matrix H = lagrangian_hess(p, q.q0, q.q1, q.q2);
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success) {
      throw SingularityError("hessian metric is not positive definite", 0.0);
    }
    // With W = H and c = -H sign(q3), W^{-1} c = -sign(q3) exactly.
    const Vector sg = sign_vector(q.q3);
    const double quad = sg.dot(H * sg);
    detail::require(quad > 0.0, "sign-gradient metric pairing vanished");
    res.sigma = std::sqrt(c.delta / quad);
    res.u = ControlVector{0.0, res.sigma * sg, Vector(0)};
    return finish(s, p, q, res);
  }

  const LinearRate lr = slf_rate_terms(s, p, q);
  Vector winv_c;
  double pairing = 0.0;
  switch (c.metric) {
    case MetricRecipe::identity:
      winv_c = lr.c;
      pairing = lr.c.squaredNorm();
      break;
    case MetricRecipe::explicit_matrix: {
      detail::require_size(c.explicit_w.rows(), n + p.m, "explicit metric");
      Eigen::LLT<Matrix> llt(c.explicit_w);
      winv_c = llt.solve(lr.c);
      pairing = lr.c.dot(winv_c);
      break;
    }
    case MetricRecipe::hessian: {
      if (p.m != 0) throw IncompatibleRecipe("hessian metric needs m = 0");
      const Matrix H = lagrangian_hess(p, q.q0, q.q1, q.q2);
      Eigen::LLT<Matrix> llt(H);
      if (llt.info() != Eigen::Success) {
        throw SingularityError("hessian metric is not positive definite", 0.0);
      }
      winv_c = llt.solve(lr.c);
      pairing = lr.c.dot(winv_c);
      break;
    }
    case MetricRecipe::sqp: {
      // W = K_S^2, so W^{-1} c = K_S^{-1} K_S^{-1} c.
      Matrix K = assemble_kkt(p, q, true);
      Eigen::PartialPivLU<Matrix> lu(K);
      res.metric_rcond = lu_rcond(lu);
      Vector y = lu.solve(lr.c);
      if (!(res.metric_rcond >= kSingularRcond) || !y.allFinite()) {
        const double hnorm =
            K.topLeftCorner(n, n).cwiseAbs().rowwise().sum().maxCoeff();
        const double tau = 1e-8 * (1.0 + hnorm);
        K.topLeftCorner(n, n).diagonal().array() += tau;
        lu.compute(K);
        res.metric_rcond = lu_rcond(lu);
        res.regularized = true;
        y = lu.solve(lr.c);
        if (!(res.metric_rcond >= kSingularRcond) || !y.allFinite()) {
          throw SingularityError("K_S is singular after regularization",
                                 res.metric_rcond);
        }
      }
      winv_c = lu.solve(y);
      pairing = y.squaredNorm();
      break;
    }
    case MetricRecipe::ahu:
      break;
  }
  if (!(pairing > 0.0) || !winv_c.allFinite()) {
    res.sigma = 1.0;
    res.u = ControlVector::zero(n, p.m);
    return finish(s, p, q, res);
  }
  res.sigma = std::sqrt(c.delta / pairing);
  res.u = ControlVector::from_stacked(-res.sigma * winv_c, n);
  return finish(s, p, q, res);
}

DirectionResult solve_direction_rate_constrained(const SlfSpec& s,
                                                 const ControlSetSpec& c,
                                                 const ProblemSpec& p,
                                                 const LiftedState& q) {
  detail::require(c.kind == ControlSetKind::rate_constrained,
                  "solve_direction_rate_constrained needs a rate_constrained set");
  c.validate();
  check_slf_compatible(s, p, q);
  if (s.kind == SlfKind::l1_gradient) {
    throw IncompatibleRecipe("l1_gradient SLF is paired with the hessian metric");
  }
  const LinearRate lr = slf_rate_terms(s, p, q);
  const double bound = -c.rate.eval(slf_value(s, p, q)) - lr.d;

  DirectionResult res;
  res.recipe = std::string("rate_") + to_string(c.rate.kind);
  if (bound >= 0.0) {
    res.u = ControlVector::zero(p.n, p.m);
  } else {
    const double cc = lr.c.squaredNorm();
    if (!(cc > 0.0)) {
      throw GuidabilityFailure(
          "rate constraint unreachable: control has no effect on DS here");
    }
    res.sigma = -bound / cc;
    res.u = ControlVector::from_stacked((bound / cc) * lr.c, p.n);
  }
  res.ds = slf_directional_derivative(s, p, q, res.u);
  return res;
}

}  // namespace slfforge
