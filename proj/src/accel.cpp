#include "slfforge/accel.hpp"

#include <cmath>

namespace slfforge {

SlfSpec accel_slf(const AccelConfig& cfg) {
  return {SlfKind::velocity_augmented, cfg.coupling};
}

DirectionResult accel_direction(const ProblemSpec& p, const LiftedState& q,
                                const AccelConfig& cfg) {
  if (p.m != 0) throw IncompatibleRecipe("accelerated recipe needs m = 0");
  detail::require(q.accelerated(), "accel_direction needs a state with v1");
  const SlfSpec s = accel_slf(cfg);
  ControlSetSpec set;
  set.kind = ControlSetKind::rate_constrained;
  set.rate = cfg.rate;
  try {
    return solve_direction_rate_constrained(s, set, p, q);
  } catch (const GuidabilityFailure&) {
    const LinearRate lr = slf_rate_terms(s, p, q);
    DirectionResult res;
    res.recipe = "accelerated";
    if (lr.d < 0.0) {
      res.u = ControlVector::zero(p.n, 0);
      res.ds = lr.d;
      res.rate_relaxed = true;
      return res;
    }
    if (cfg.allow_kick && q.v1->squaredNorm() == 0.0 && q.q3.squaredNorm() > 0.0) {
      const Matrix H = lagrangian_hess(p, q.q0, q.q1, q.q2);
      res.u = ControlVector{0.0, H * q.q3, Vector(0)};
      res.ds = slf_directional_derivative(s, p, q, res.u);
      res.kicked = true;
      return res;
    }
    throw;
  }
}

JumpResult velocity_kick_jump(const ProblemSpec& p, const LiftedState& q,
                              const ControlVector& u, const AccelConfig& cfg,
                              const JumpConfig& jcfg) {
  const SlfSpec s = accel_slf(cfg);
  const double S = slf_value(s, p, q);
  const double w2 = u.u1.squaredNorm();
  if (!(w2 > 0.0)) throw GuidabilityFailure("velocity kick has no effect");
  const double a = -0.5 * w2;
  double h = std::sqrt(2.0 * S / w2);
  JumpResult r;
  r.mode = JumpMode::velocity_kick;
  for (int i = 0; i < 60; ++i, h *= 0.5) {
    ++r.evals;
    double f;
    try {
      f = phi_along(s, p, q, u, h);
    } catch (const EvaluationError&) {
      continue;
    }
    if (f < S + jcfg.c1 * a * h * h) {
      r.h = h;
      r.q_next = apply_map(p, q, u, h);
      r.s_next = slf_value(s, p, r.q_next);
      r.backtracks = i;
      return r;
    }
  }
  throw GuidabilityFailure("velocity kick did not decrease the SLF");
}

Trace accel_run(const ProblemSpec& p, GeneratorConfig cfg, const Vector& q1_guess) {
  if (p.m != 0) throw IncompatibleRecipe("accelerated recipe needs m = 0");
  cfg.recipe = cfg.accel.lift ? Recipe::accelerated : Recipe::gradient;
  Trace t = run(p, cfg, q1_guess, Vector(0));
  if (!cfg.accel.lift) t.recipe = "accelerated(lift=off)";
  return t;
}

}  // namespace slfforge
