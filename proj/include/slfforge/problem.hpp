#pragma once

#include <functional>
#include <string>
#include <vector>

#include "slfforge/common.hpp"
#include "slfforge/state.hpp"

namespace slfforge {

/// Data functions of the problem
///
///   minimize g0(q1)  subject to  lower <= g(q1) <= upper.
///
/// Rows with lower == upper are equality constraints. Evaluators must be
/// pure so one spec can back several concurrent runs. cons_hess may be left
/// empty, in which case constraint Hessians are formed by central
/// differences of cons_jac.
struct ProblemSpec {
  std::string name;
  std::string description;
  int n = 1;
  int m = 0;

  std::function<double(const Vector&)> cost;
  std::function<Vector(const Vector&)> cost_grad;
  std::function<Matrix(const Vector&)> cost_hess;
  std::function<Vector(const Vector&)> cons;
  std::function<Matrix(const Vector&)> cons_jac;
  std::function<std::vector<Matrix>(const Vector&)> cons_hess;

  Vector lower;
  Vector upper;

  bool is_equality_only = true;
  /// Zero Hessians and affine constraints.
  bool is_lp = false;
  /// Constant cost Hessian and affine constraints (includes LPs).
  bool is_quadratic = false;

  /// Registered default starting point and multiplier guess.
  Vector start_q1;
  Vector start_q2;

  /// Checks sizes, bound ordering and vacuous rows; fills is_equality_only
  /// and default starts. Throws ContractViolation.
  void finalize();
};

/// Distance of the current point from the KKT target set, infinity norms.
struct TargetResidual {
  double grad_norm = 0.0;
  double bound_violation = 0.0;
  double comp_violation = 0.0;
  double total = 0.0;
};

/// Outcome of comparing analytic derivatives against central differences.
struct DerivativeReport {
  double grad_error = 0.0;
  double jac_error = 0.0;
  double hess_error = 0.0;
  double max_error = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// Tolerance under which q4_i counts as sitting on a bound.
double active_bound_tolerance(double bound);

// Checked evaluators: verify sizes and finiteness, and rethrow evaluator
// failures as EvaluationError with the probe point in the message.
double eval_cost(const ProblemSpec& p, const Vector& q1);
Vector eval_cost_grad(const ProblemSpec& p, const Vector& q1);
Matrix eval_cost_hess(const ProblemSpec& p, const Vector& q1);
Vector eval_cons(const ProblemSpec& p, const Vector& q1);
Matrix eval_cons_jac(const ProblemSpec& p, const Vector& q1);
std::vector<Matrix> eval_cons_hess(const ProblemSpec& p, const Vector& q1);

/// q0 * grad g0(q1) + Jg(q1)^T q2.
Vector lagrangian_grad(const ProblemSpec& p, double q0, const Vector& q1,
                       const Vector& q2);

/// q0 * hess g0(q1) + sum_i q2_i hess g_i(q1), symmetrized.
Matrix lagrangian_hess(const ProblemSpec& p, double q0, const Vector& q1,
                       const Vector& q2);

/// Same sum without the final symmetrization, for asymmetry checks.
Matrix lagrangian_hess_raw(const ProblemSpec& p, double q0, const Vector& q1,
                           const Vector& q2);

/// Residual of the KKT target set at q, including the complementarity
/// case analysis on every inequality row. Requires q.q0 > 0.
TargetResidual target_residual(const ProblemSpec& p, const LiftedState& q);

/// Central-difference check of cost_grad, cons_jac and the Hessians at q1.
/// Errors are relative: ||analytic - fd||_inf / max(1, ||analytic||_inf).
/// Passes iff the largest error is at most 100 * delta.
DerivativeReport validate_derivatives(const ProblemSpec& p, const Vector& q1,
                                      double delta);

/// Central-difference Jacobian of a vector function.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f,
                   const Vector& x, double delta);

}  // namespace slfforge
