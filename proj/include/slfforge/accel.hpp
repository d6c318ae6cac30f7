#pragma once

#include "slfforge/generator.hpp"

namespace slfforge {

/// SLF used by accelerated runs.
SlfSpec accel_slf(const AccelConfig& cfg);

/// Rate-constrained direction for the second-order lift (m = 0).
///
/// DS = d + <e, u1> with e = v1 - k q3 and d = <q3 - k e, -H v1>. The
/// minimum-norm u1 meeting DS <= -R(S) is returned. When the bound is out of
/// reach (e = 0) the direction falls back to coasting (u = 0, if d < 0) or,
/// from rest (v1 = 0), to a velocity kick u1 = H q3 whose decrease is second
/// order in h. Throws GuidabilityFailure when neither applies.
DirectionResult accel_direction(const ProblemSpec& p, const LiftedState& q,
                                const AccelConfig& cfg);

/// Jump for a kick direction: h0 = sqrt(2 S) / |H q3|, halved until
/// phi(h) < S - c1 |H q3|^2 h^2 / 2. Throws GuidabilityFailure.
JumpResult velocity_kick_jump(const ProblemSpec& p, const LiftedState& q,
                              const ControlVector& u, const AccelConfig& cfg,
                              const JumpConfig& jcfg = {});

/// Generator loop on the lifted state (q, v1) with the stopping test
/// augmented by |v1|_inf <= epsilon. With cfg.accel.lift == false the run
/// is the gradient recipe.
Trace accel_run(const ProblemSpec& p, GeneratorConfig cfg, const Vector& q1_guess);

}  // namespace slfforge
