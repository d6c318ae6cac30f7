#pragma once

#include <optional>

#include "slfforge/common.hpp"

namespace slfforge {

/// Point of the lifted space q = (q0, q1, q2, q3, q4, q5).
///
/// q0 is the cost multiplier, q1 the optimization variable, q2 the
/// constraint multiplier, q3 the negative Lagrangian gradient, q4 the
/// constraint value and q5 the cost value. v1 is present only for the
/// second-order (accelerated) lift, where q1' = v1 and v1' = u1.
///
/// The same layout doubles as the time derivative of a state (see
/// eval_field), in which case each member holds the matching rate.
struct LiftedState {
  double q0 = 1.0;
  Vector q1;
  Vector q2;
  Vector q3;
  Vector q4;
  double q5 = 0.0;
  std::optional<Vector> v1;

  bool accelerated() const { return v1.has_value(); }
};

using StateRate = LiftedState;

/// Control u = (u0, u1, u2): rates of the cost multiplier, the variable (or
/// its velocity in accelerated mode) and the constraint multiplier.
struct ControlVector {
  double u0 = 0.0;
  Vector u1;
  Vector u2;

  static ControlVector zero(Eigen::Index n, Eigen::Index m) {
    return {0.0, Vector::Zero(n), Vector::Zero(m)};
  }
  /// Stacked (u1, u2).
  Vector stacked() const {
    Vector out(u1.size() + u2.size());
    out << u1, u2;
    return out;
  }
  static ControlVector from_stacked(const Vector& z, Eigen::Index n) {
    return {0.0, z.head(n), z.tail(z.size() - n)};
  }
};

}  // namespace slfforge
