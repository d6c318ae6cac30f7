#pragma once

#include "slfforge/slf.hpp"

namespace slfforge {

enum class JumpMode { exact_quadratic, cubic_backtrack, full_minimization, velocity_kick };

const char* to_string(JumpMode mode);

struct JumpConfig {
  /// Sufficient SLF decrease constant.
  double c1 = 1e-4;
  int max_backtracks = 30;
  /// Closed-form minimizer when phi is an exact quadratic.
  bool allow_exact = true;
  /// Replace acceptance by a full one-dimensional minimization of phi.
  bool full_minimization = false;
  /// Doublings allowed once phi(10 h0) < phi(h0).
  int max_expansions = 50;
};

struct JumpResult {
  double h = 0.0;
  LiftedState q_next;
  double s_next = 0.0;
  int evals = 0;
  int backtracks = 0;
  JumpMode mode = JumpMode::cubic_backtrack;
};

/// Initial jump h0 = S / (-DS).
double step_guess(double s_val, double ds_val);

/// Iterative map: Euler jump in (q0, q1, q2), or v1 += h u1, q1 += h v1 in
/// accelerated mode, then surface restoration.
LiftedState apply_map(const ProblemSpec& p, const LiftedState& q,
                      const ControlVector& u, double h);

/// S along the jump; phi(0) is S(q) exactly.
double phi_along(const SlfSpec& s, const ProblemSpec& p, const LiftedState& q,
                 const ControlVector& u, double h);

/// Jump size by approximate maximal SLF decrement.
///
/// QPs under the quadratic SLF take the closed-form minimizer of the exact
/// quadratic phi. Otherwise: start at step_guess, accept on sufficient
/// decrease, backtrack to the minimizer of a quadratic/cubic Hermite fit
/// clamped to [0.1 h, 0.5 h]. When h0 is accepted outright and phi(10 h0)
/// is lower still, h is expanded by doubling; running out of doublings is a
/// line failure (unbounded direction). Throws LineFailure.
JumpResult solve_jump(const SlfSpec& s, const ProblemSpec& p,
                      const LiftedState& q, const ControlVector& u,
                      const JumpConfig& cfg = {});

/// Minimizer of the cubic through phi(0) = f0, phi'(0) = g0, phi(a) = fa and,
/// when b > 0, phi(b) = fb. Falls back to the quadratic fit when b <= 0.
double hermite_minimizer(double f0, double g0, double a, double fa, double b,
                         double fb);

}  // namespace slfforge
