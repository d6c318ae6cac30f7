#include "slfforge/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slfforge {

namespace detail {

std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ']';
  return os.str();
}

}  // namespace detail

namespace {

constexpr double kFdHessStep = 1e-6;

template <typename F>
auto guarded(const char* what, const Vector& q1, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const EvaluationError&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError(std::string(what) + " failed at q1 = " +
                          detail::format_vector(q1) + ": " + e.what());
  }
}

template <typename Derived>
void check_finite(const Eigen::MatrixBase<Derived>& value, const char* what,
                  const Vector& q1) {
  if (!value.allFinite()) {
    throw EvaluationError(std::string(what) +
                          " returned a non-finite value at q1 = " +
                          detail::format_vector(q1));
  }
}

double rel_error(const Matrix& analytic, const Matrix& fd) {
  if (analytic.size() == 0) return 0.0;
  const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
  return (analytic - fd).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

void ProblemSpec::finalize() {
  detail::require(n >= 1, "problem '" + name + "': n must be >= 1");
  detail::require(m >= 0, "problem '" + name + "': m must be >= 0");
  detail::require(static_cast<bool>(cost) && static_cast<bool>(cost_grad) &&
                      static_cast<bool>(cost_hess),
                  "problem '" + name + "': cost evaluators are required");
  if (m > 0) {
    detail::require(static_cast<bool>(cons) && static_cast<bool>(cons_jac),
                    "problem '" + name + "': constraint evaluators are required");
  } else {
    cons = [](const Vector&) { return Vector(0); };
    const int nn = n;
    cons_jac = [nn](const Vector&) { return Matrix(0, nn); };
    cons_hess = [](const Vector&) { return std::vector<Matrix>{}; };
    lower.resize(0);
    upper.resize(0);
  }
  detail::require_size(lower.size(), m, "lower bounds");
  detail::require_size(upper.size(), m, "upper bounds");
  is_equality_only = true;
  for (int i = 0; i < m; ++i) {
    detail::require(!(std::isnan(lower[i]) || std::isnan(upper[i])),
                    "problem '" + name + "': NaN bound in row " +
                        std::to_string(i));
    detail::require(lower[i] <= upper[i], "problem '" + name +
                                              "': lower > upper in row " +
                                              std::to_string(i));
    detail::require(!(std::isinf(lower[i]) && std::isinf(upper[i])),
                    "problem '" + name + "': row " + std::to_string(i) +
                        " has both bounds infinite");
    if (lower[i] != upper[i]) is_equality_only = false;
  }
  if (start_q1.size() == 0) start_q1 = Vector::Zero(n);
  if (start_q2.size() == 0) start_q2 = Vector::Zero(m);
  detail::require_size(start_q1.size(), n, "start_q1");
  detail::require_size(start_q2.size(), m, "start_q2");
  if (is_lp) is_quadratic = true;
}

double active_bound_tolerance(double bound) {
  return 1e-8 * (1.0 + std::abs(bound));
}

double eval_cost(const ProblemSpec& p, const Vector& q1) {
  detail::require_size(q1.size(), p.n, "q1");
  const double v = guarded("cost", q1, [&] { return p.cost(q1); });
  if (!std::isfinite(v)) {
    throw EvaluationError("cost returned a non-finite value at q1 = " +
                          detail::format_vector(q1));
  }
  return v;
}

Vector eval_cost_grad(const ProblemSpec& p, const Vector& q1) {
  detail::require_size(q1.size(), p.n, "q1");
  Vector g = guarded("cost_grad", q1, [&] { return p.cost_grad(q1); });
  detail::require_size(g.size(), p.n, "cost_grad output");
  check_finite(g, "cost_grad", q1);
  return g;
}

Matrix eval_cost_hess(const ProblemSpec& p, const Vector& q1) {
  detail::require_size(q1.size(), p.n, "q1");
  Matrix h = guarded("cost_hess", q1, [&] { return p.cost_hess(q1); });
  detail::require(h.rows() == p.n && h.cols() == p.n,
                  "cost_hess output has the wrong shape");
  check_finite(h, "cost_hess", q1);
  return h;
}

Vector eval_cons(const ProblemSpec& p, const Vector& q1) {
  detail::require_size(q1.size(), p.n, "q1");
  if (p.m == 0) return Vector(0);
  Vector g = guarded("cons", q1, [&] { return p.cons(q1); });
  detail::require_size(g.size(), p.m, "cons output");
  check_finite(g, "cons", q1);
  return g;
}

Matrix eval_cons_jac(const ProblemSpec& p, const Vector& q1) {
  detail::require_size(q1.size(), p.n, "q1");
  if (p.m == 0) return Matrix(0, p.n);
  Matrix j = guarded("cons_jac", q1, [&] { return p.cons_jac(q1); });
  detail::require(j.rows() == p.m && j.cols() == p.n,
                  "cons_jac output has the wrong shape");
  check_finite(j, "cons_jac", q1);
  return j;
}

std::vector<Matrix> eval_cons_hess(const ProblemSpec& p, const Vector& q1) {
  detail::require_size(q1.size(), p.n, "q1");
  std::vector<Matrix> out;
  if (p.m == 0) return out;
  if (p.cons_hess) {
    out = guarded("cons_hess", q1, [&] { return p.cons_hess(q1); });
    detail::require(static_cast<int>(out.size()) == p.m,
                    "cons_hess must return one matrix per constraint");
    for (const auto& h : out) {
      detail::require(h.rows() == p.n && h.cols() == p.n,
                      "cons_hess output has the wrong shape");
      check_finite(h, "cons_hess", q1);
    }
    return out;
  }
  // Fallback: differentiate each Jacobian row, then symmetrize.
  out.assign(p.m, Matrix::Zero(p.n, p.n));
  for (int k = 0; k < p.n; ++k) {
    Vector xp = q1, xm = q1;
    xp[k] += kFdHessStep;
    xm[k] -= kFdHessStep;
    const Matrix jp = eval_cons_jac(p, xp);
    const Matrix jm = eval_cons_jac(p, xm);
    for (int i = 0; i < p.m; ++i) {
      out[i].col(k) = (jp.row(i) - jm.row(i)).transpose() / (2 * kFdHessStep);
    }
  }
  for (auto& h : out) h = 0.5 * (h + h.transpose()).eval();
  return out;
}

Vector lagrangian_grad(const ProblemSpec& p, double q0, const Vector& q1,
                       const Vector& q2) {
  detail::require_size(q1.size(), p.n, "q1");
  detail::require_size(q2.size(), p.m, "q2");
  Vector g = q0 * eval_cost_grad(p, q1);
  if (p.m > 0) g.noalias() += eval_cons_jac(p, q1).transpose() * q2;
  return g;
}

Matrix lagrangian_hess_raw(const ProblemSpec& p, double q0, const Vector& q1,
                           const Vector& q2) {
  detail::require_size(q1.size(), p.n, "q1");
  detail::require_size(q2.size(), p.m, "q2");
  Matrix h = q0 * eval_cost_hess(p, q1);
  if (p.m > 0 && !p.is_quadratic) {
    const auto hs = eval_cons_hess(p, q1);
    for (int i = 0; i < p.m; ++i) h += q2[i] * hs[i];
  }
  return h;
}

Matrix lagrangian_hess(const ProblemSpec& p, double q0, const Vector& q1,
                       const Vector& q2) {
  const Matrix h = lagrangian_hess_raw(p, q0, q1, q2);
  return 0.5 * (h + h.transpose());
}

TargetResidual target_residual(const ProblemSpec& p, const LiftedState& q) {
  if (!(q.q0 > 0.0)) {
    throw NormalizationError("target_residual requires q0 > 0, got " +
                             std::to_string(q.q0));
  }
  detail::require_size(q.q3.size(), p.n, "q3");
  detail::require_size(q.q2.size(), p.m, "q2");
  detail::require_size(q.q4.size(), p.m, "q4");

  TargetResidual r;
  r.grad_norm = p.n > 0 ? q.q3.cwiseAbs().maxCoeff() : 0.0;
  for (int i = 0; i < p.m; ++i) {
    const double lo = p.lower[i], hi = p.upper[i], g = q.q4[i], y = q.q2[i];
    r.bound_violation =
        std::max({r.bound_violation, lo - g, g - hi, 0.0});
    if (lo == hi) continue;  // equality row: multiplier unrestricted
    const bool at_lo = std::isfinite(lo) && g <= lo + active_bound_tolerance(lo);
    const bool at_hi = std::isfinite(hi) && g >= hi - active_bound_tolerance(hi);
    double comp;
    if (at_lo && at_hi) {
      comp = std::min(std::max(0.0, y), std::max(0.0, -y));
    } else if (at_lo) {
      comp = std::max(0.0, y);
    } else if (at_hi) {
      comp = std::max(0.0, -y);
    } else {
      comp = std::abs(y);
    }
    r.comp_violation = std::max(r.comp_violation, comp);
  }
  r.total = std::max({r.grad_norm, r.bound_violation, r.comp_violation});
  return r;
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f,
                   const Vector& x, double delta) {
  const Vector f0 = f(x);
  Matrix jac(f0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vector xp = x, xm = x;
    xp[k] += delta;
    xm[k] -= delta;
    jac.col(k) = (f(xp) - f(xm)) / (2 * delta);
  }
  return jac;
}

DerivativeReport validate_derivatives(const ProblemSpec& p, const Vector& q1,
                                      double delta) {
  detail::require(delta > 0.0, "validate_derivatives: delta must be > 0");
  detail::require_size(q1.size(), p.n, "q1");

  DerivativeReport rep;
  rep.threshold = 100.0 * delta;

  const auto cost_as_vec = [&](const Vector& x) {
    return Vector::Constant(1, eval_cost(p, x));
  };
  const Matrix grad_fd = fd_jacobian(cost_as_vec, q1, delta);
  rep.grad_error = rel_error(eval_cost_grad(p, q1).transpose(), grad_fd);

  const auto cost_grad = [&](const Vector& x) { return eval_cost_grad(p, x); };
  Matrix hess_fd = fd_jacobian(cost_grad, q1, delta);
  rep.hess_error = rel_error(eval_cost_hess(p, q1), hess_fd);

  if (p.m > 0) {
    const auto cons = [&](const Vector& x) { return eval_cons(p, x); };
    rep.jac_error = rel_error(eval_cons_jac(p, q1), fd_jacobian(cons, q1, delta));
    const auto hs = eval_cons_hess(p, q1);
    for (int i = 0; i < p.m; ++i) {
      const auto row = [&](const Vector& x) -> Vector {
        return eval_cons_jac(p, x).row(i).transpose();
      };
      rep.hess_error =
          std::max(rep.hess_error, rel_error(hs[i], fd_jacobian(row, q1, delta)));
    }
  }
  rep.max_error = std::max({rep.grad_error, rep.jac_error, rep.hess_error});
  rep.passed = rep.max_error <= rep.threshold;
  return rep;
}

}  // namespace slfforge
