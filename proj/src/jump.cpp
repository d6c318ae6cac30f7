#include "slfforge/jump.hpp"

#include <algorithm>
#include <cmath>

namespace slfforge {

namespace {

struct PhiCounter {
  const SlfSpec& s;
  const ProblemSpec& p;
  const LiftedState& q;
  const ControlVector& u;
  int evals = 0;

  /// Probe failures count as +inf so the search backs away from them.
  double operator()(double h) {
    ++evals;
    try {
      return phi_along(s, p, q, u, h);
    } catch (const EvaluationError&) {
      return kInf;
    }
  }
};

JumpResult make_result(const SlfSpec& s, const ProblemSpec& p,
                       const LiftedState& q, const ControlVector& u, double h,
                       int evals, JumpMode mode) {
  JumpResult r;
  r.h = h;
  r.q_next = apply_map(p, q, u, h);
  r.s_next = slf_value(s, p, r.q_next);
  r.evals = evals;
  r.mode = mode;
  return r;
}

JumpResult full_minimize(const SlfSpec& s, const ProblemSpec& p,
                         const LiftedState& q, const ControlVector& u,
                         double h0) {
  detail::require(!q.accelerated(),
                  "full minimization is defined for the standard map only");
  int evals = 0;
  const auto dphi = [&](double h) {
    ++evals;
    return slf_directional_derivative(s, p, apply_map(p, q, u, h), u);
  };
  double lo = 0.0, hi = h0;
  for (int i = 0; dphi(hi) < 0.0; ++i) {
    if (i >= 200) throw LineFailure("full minimization: phi decreases without bound");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dphi(mid) < 0.0 ? lo : hi) = mid;
  }
  return make_result(s, p, q, u, 0.5 * (lo + hi), evals, JumpMode::full_minimization);
}

}  // namespace

const char* to_string(JumpMode mode) {
  switch (mode) {
    case JumpMode::exact_quadratic: return "exact_quadratic";
    case JumpMode::cubic_backtrack: return "cubic_backtrack";
    case JumpMode::full_minimization: return "full_minimization";
    case JumpMode::velocity_kick: return "velocity_kick";
  }
  return "?";
}

double step_guess(double s_val, double ds_val) {
  detail::require(s_val > 0.0, "step_guess: S must be > 0");
  detail::require(ds_val < 0.0, "step_guess: descent certificate violated (DS >= 0)");
  return s_val / -ds_val;
}

LiftedState apply_map(const ProblemSpec& p, const LiftedState& q,
                      const ControlVector& u, double h) {
  detail::require(h >= 0.0, "apply_map: h must be >= 0");
  detail::require_size(u.u1.size(), p.n, "u1");
  detail::require_size(u.u2.size(), p.m, "u2");
  const double q0 = q.q0 + h * u.u0;
  const Vector q2 = q.q2 + h * u.u2;
  if (q.v1) {
    const Vector v1 = *q.v1 + h * u.u1;
    return restore_to_surface(p, q0, q.q1 + h * v1, q2, v1);
  }
  return restore_to_surface(p, q0, q.q1 + h * u.u1, q2);
}

double phi_along(const SlfSpec& s, const ProblemSpec& p, const LiftedState& q,
                 const ControlVector& u, double h) {
  detail::require(h >= 0.0, "phi_along: h must be >= 0");
  if (h == 0.0) return slf_value(s, p, q);
  try {
    return slf_value(s, p, apply_map(p, q, u, h));
  } catch (const EvaluationError& e) {
    throw EvaluationError(std::string(e.what()) + " (jump h = " +
                          std::to_string(h) + ")");
  }
}

double hermite_minimizer(double f0, double g0, double a, double fa, double b,
                         double fb) {
  if (!(b > 0.0) || !std::isfinite(fb)) {
    const double denom = 2.0 * (fa - f0 - g0 * a);
    return -g0 * a * a / denom;
  }
  const double d1 = fa - f0 - g0 * a;
  const double d2 = fb - f0 - g0 * b;
  const double scale = 1.0 / (a * a * b * b * (a - b));
  const double A = scale * (b * b * d1 - a * a * d2);
  const double B = scale * (-b * b * b * d1 + a * a * a * d2);
  if (std::abs(A) < 1e-300) return -g0 / (2.0 * B);
  const double disc = B * B - 3.0 * A * g0;
  if (disc < 0.0) return 0.5 * a;
  return (-B + std::sqrt(disc)) / (3.0 * A);
}

JumpResult solve_jump(const SlfSpec& s, const ProblemSpec& p,
                      const LiftedState& q, const ControlVector& u,
                      const JumpConfig& cfg) {
  const double S = slf_value(s, p, q);
  const double DS = slf_directional_derivative(s, p, q, u);
  if (!(DS < 0.0)) {
    throw ContractViolation("solve_jump: descent certificate violated (DS >= 0)");
  }
  const double h0 = step_guess(S, DS);
  if (cfg.full_minimization) return full_minimize(s, p, q, u, h0);

  if (cfg.allow_exact && s.kind == SlfKind::quadratic_residual && p.is_quadratic &&
      !q.accelerated()) {
    // q3 and q4 are affine in h: phi(h) = S + h DS + h^2 |r'|^2 / 2.
    const StateRate rate = eval_field(p, q, u);
    const double curv = rate.q3.squaredNorm() + rate.q4.squaredNorm();
    if (curv > 0.0) {
      JumpResult r = make_result(s, p, q, u, -DS / curv, 1, JumpMode::exact_quadratic);
      if (r.s_next < S) return r;
    }
  }

  PhiCounter phi{s, p, q, u};
  double h = h0, h_prev = 0.0, f_prev = kInf;
  double f = phi(h);
  int backtracks = 0;
  // Strict decrease is required as well: for tiny |DS| the Armijo bound
  // rounds to S itself.
  while (!(f <= S + cfg.c1 * h * DS && f < S)) {
    if (++backtracks > cfg.max_backtracks) {
      throw LineFailure("no acceptable jump after " +
                        std::to_string(cfg.max_backtracks) + " backtracks");
    }
    double next = std::isfinite(f) ? hermite_minimizer(S, DS, h, f, h_prev, f_prev)
                                   : 0.5 * h;
    if (!std::isfinite(next)) next = 0.5 * h;
    next = std::clamp(next, 0.1 * h, 0.5 * h);
    h_prev = h;
    f_prev = f;
    h = next;
    f = phi(h);
  }
  if (backtracks == 0) {
    const double f10 = phi(10.0 * h);
    if (f10 < f) {
      h *= 10.0;
      f = f10;
      int doublings = 0;
      for (;;) {
        const double f2 = phi(2.0 * h);
        if (!(f2 < f)) break;
        if (++doublings > cfg.max_expansions) {
          throw LineFailure("SLF decreases without bound along the direction");
        }
        h *= 2.0;
        f = f2;
      }
    }
  }
  JumpResult r = make_result(s, p, q, u, h, phi.evals, JumpMode::cubic_backtrack);
  r.backtracks = backtracks;
  if (!(r.s_next < S)) throw LineFailure("accepted jump did not decrease the SLF");
  return r;
}

}  // namespace slfforge
