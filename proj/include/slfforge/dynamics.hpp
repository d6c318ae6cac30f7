#pragma once

#include "slfforge/problem.hpp"
#include "slfforge/state.hpp"

namespace slfforge {

/// Control matrix of the stabilizable subsystem q_a = (q0, q2, q3, q4), plus
/// v1 in accelerated mode, so that q_a' = B u + drift.
///
/// Row blocks: q0 (1), q2 (m), q3 (n), q4 (m), then v1 (n) when accelerated.
/// Column blocks: u0 (1), u1 (n), u2 (m). The drift is zero in standard
/// mode; in accelerated mode it carries the v1-driven parts of q3' and q4'.
struct ControlJacobian {
  Matrix B;
  Vector drift;
  int n = 0;
  int m = 0;
  bool accelerated = false;

  Eigen::Index q3_row() const { return 1 + m; }
  Eigen::Index q4_row() const { return 1 + m + n; }
  Eigen::Index v1_row() const { return 1 + 2 * m + n; }
};

/// Time derivative of the lifted state under control u.
///
/// Standard mode: q0' = u0, q1' = u1, q2' = u2, q3' = -H u1 - dL(u0, q1, u2),
/// q4' = J u1, q5' = <grad g0, u1>. Accelerated mode replaces u1 by v1 in
/// every row except v1' = u1.
StateRate eval_field(const ProblemSpec& p, const LiftedState& q,
                     const ControlVector& u);

/// State on the hypersurface through (1, q1, q2); v1 = 0 when accelerated.
LiftedState init_state(const ProblemSpec& p, const Vector& q1_guess,
                       const Vector& q2_guess, bool accelerated = false);

ControlJacobian control_jacobian(const ProblemSpec& p, const LiftedState& q);

/// Largest violation among the three integrals of motion (infinity norms).
double hypersurface_residual(const ProblemSpec& p, const LiftedState& q);

/// Recomputes q3, q4, q5 from (q0, q1, q2). v1 is carried through unchanged.
LiftedState restore_to_surface(const ProblemSpec& p, double q0,
                               const Vector& q1, const Vector& q2,
                               const std::optional<Vector>& v1 = std::nullopt);

/// (A)-subsystem rows of a rate, stacked in ControlJacobian row order.
Vector stack_active_rates(const StateRate& rate);

}  // namespace slfforge
