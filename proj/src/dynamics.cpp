#include "slfforge/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace slfforge {

namespace {

void check_state(const ProblemSpec& p, const LiftedState& q) {
  detail::require_size(q.q1.size(), p.n, "q1");
  detail::require_size(q.q2.size(), p.m, "q2");
  detail::require_size(q.q3.size(), p.n, "q3");
  detail::require_size(q.q4.size(), p.m, "q4");
  if (q.v1) detail::require_size(q.v1->size(), p.n, "v1");
}

void check_control(const ProblemSpec& p, const ControlVector& u) {
  detail::require_size(u.u1.size(), p.n, "u1");
  detail::require_size(u.u2.size(), p.m, "u2");
}

}  // namespace

StateRate eval_field(const ProblemSpec& p, const LiftedState& q,
                     const ControlVector& u) {
  check_state(p, q);
  check_control(p, u);

  // In accelerated mode the variable moves with v1 and u1 drives v1.
  const Vector& x_rate = q.v1 ? *q.v1 : u.u1;
  const Matrix H = lagrangian_hess(p, q.q0, q.q1, q.q2);
  const Matrix J = eval_cons_jac(p, q.q1);
  const Vector grad0 = eval_cost_grad(p, q.q1);

  StateRate r;
  r.q0 = u.u0;
  r.q1 = x_rate;
  r.q2 = u.u2;
  r.q3 = -H * x_rate - u.u0 * grad0;
  if (p.m > 0) r.q3.noalias() -= J.transpose() * u.u2;
  r.q4 = J * x_rate;
  r.q5 = grad0.dot(x_rate);
  if (q.v1) r.v1 = u.u1;
  return r;
}

LiftedState init_state(const ProblemSpec& p, const Vector& q1_guess,
                       const Vector& q2_guess, bool accelerated) {
  detail::require_size(q1_guess.size(), p.n, "q1_guess");
  detail::require_size(q2_guess.size(), p.m, "q2_guess");
  std::optional<Vector> v1;
  if (accelerated) v1 = Vector::Zero(p.n);
  return restore_to_surface(p, 1.0, q1_guess, q2_guess, v1);
}

ControlJacobian control_jacobian(const ProblemSpec& p, const LiftedState& q) {
  check_state(p, q);
  const int n = p.n, m = p.m;
  ControlJacobian cj;
  cj.n = n;
  cj.m = m;
  cj.accelerated = q.accelerated();
  const Eigen::Index rows = 1 + 2 * m + n + (cj.accelerated ? n : 0);
  cj.B = Matrix::Zero(rows, 1 + n + m);
  cj.drift = Vector::Zero(rows);

  const Matrix H = lagrangian_hess(p, q.q0, q.q1, q.q2);
  const Matrix J = eval_cons_jac(p, q.q1);
  const Vector grad0 = eval_cost_grad(p, q.q1);

  cj.B(0, 0) = 1.0;
  cj.B.block(1, 1 + n, m, m).setIdentity();
  cj.B.block(cj.q3_row(), 0, n, 1) = -grad0;
  cj.B.block(cj.q3_row(), 1 + n, n, m) = -J.transpose();
  if (cj.accelerated) {
    cj.drift.segment(cj.q3_row(), n) = -H * *q.v1;
    cj.drift.segment(cj.q4_row(), m) = J * *q.v1;
    cj.B.block(cj.v1_row(), 1, n, n).setIdentity();
  } else {
    cj.B.block(cj.q3_row(), 1, n, n) = -H;
    cj.B.block(cj.q4_row(), 1, m, n) = J;
  }
  return cj;
}

double hypersurface_residual(const ProblemSpec& p, const LiftedState& q) {
  check_state(p, q);
  const Vector r3 = q.q3 + lagrangian_grad(p, q.q0, q.q1, q.q2);
  const Vector r4 = q.q4 - eval_cons(p, q.q1);
  const double r5 = std::abs(q.q5 - eval_cost(p, q.q1));
  double out = r5;
  if (r3.size()) out = std::max(out, r3.cwiseAbs().maxCoeff());
  if (r4.size()) out = std::max(out, r4.cwiseAbs().maxCoeff());
  return out;
}

LiftedState restore_to_surface(const ProblemSpec& p, double q0,
                               const Vector& q1, const Vector& q2,
                               const std::optional<Vector>& v1) {
  LiftedState q;
  q.q0 = q0;
  q.q1 = q1;
  q.q2 = q2;
  q.q3 = -lagrangian_grad(p, q0, q1, q2);
  q.q4 = eval_cons(p, q1);
  q.q5 = eval_cost(p, q1);
  if (v1) {
    detail::require_size(v1->size(), p.n, "v1");
    q.v1 = *v1;
  }
  return q;
}

Vector stack_active_rates(const StateRate& rate) {
  const Eigen::Index n = rate.q3.size(), m = rate.q4.size();
  const Eigen::Index extra = rate.v1 ? n : 0;
  Vector out(1 + 2 * m + n + extra);
  out[0] = rate.q0;
  out.segment(1, m) = rate.q2;
  out.segment(1 + m, n) = rate.q3;
  out.segment(1 + m + n, m) = rate.q4;
  if (rate.v1) out.tail(n) = *rate.v1;
  return out;
}

}  // namespace slfforge
