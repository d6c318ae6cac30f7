#include "slfforge/generator.hpp"

#include <chrono>
#include <sstream>

#include "slfforge/accel.hpp"
#include "slfforge/stability.hpp"

namespace slfforge {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct StepFailure {
  Outcome outcome;
  std::string detail;
};

class Loop {
 public:
  Loop(const ProblemSpec& p, const GeneratorConfig& cfg)
      : p_(p), cfg_(cfg), pair_(recipe_pair(cfg)) {
    accelerated_ = pair_.slf.kind == SlfKind::velocity_augmented;
  }

  Trace run(const Vector& q1_guess, const Vector& q2_guess) {
    const auto t0 = Clock::now();
    Trace t;
    t.problem = p_.name;
    t.recipe = to_string(cfg_.recipe);
    t.epsilon = cfg_.epsilon;

    LiftedState q = init_state(p_, q1_guess, q2_guess, accelerated_);
    check_slf_compatible(pair_.slf, p_, q);
    double S = slf_value(pair_.slf, p_, q);
    add_advisories(t, q);

    for (int k = 0;; ++k) {
      IterateRecord rec = snapshot(k, q, S, t0);
      t.max_hypersurface = std::max(t.max_hypersurface, rec.hypersurface);

      std::optional<StepFailure> stop;
      if (S <= cfg_.epsilon && (!accelerated_ || inf_norm(*q.v1) <= cfg_.epsilon)) {
        stop = StepFailure{Outcome::converged, "S <= epsilon"};
      } else if (k >= cfg_.max_iter) {
        stop = StepFailure{Outcome::max_iter, "iteration limit reached"};
      }

      DirectionResult dir;
      JumpResult jump;
      if (!stop) stop = step(q, dir, jump, t.evals);
      if (stop) {
        t.outcome = stop->outcome;
        t.detail = stop->detail;
        t.iterations = k;
        t.final_state = q;
        t.final_S = S;
        t.final_residual = rec.residual;
        keep(t, std::move(rec), true);
        break;
      }

      rec.u = dir.u;
      rec.DS = dir.ds;
      rec.h = jump.h;
      rec.evals = jump.evals + 1;
      rec.jump_mode = to_string(jump.mode);
      if (dir.regularized) rec.note = "regularized";
      if (dir.rate_relaxed) rec.note = "coast";
      if (dir.kicked) rec.note = "velocity_kick";
      if (jump.q_next.q5 > q.q5) t.cost_increased = true;
      keep(t, std::move(rec), k == 0);
      q = std::move(jump.q_next);
      S = jump.s_next;
    }
    t.seconds = elapsed(t0);
    return t;
  }

 private:
  IterateRecord snapshot(int k, const LiftedState& q, double S,
                         Clock::time_point t0) const {
    IterateRecord rec;
    rec.k = k;
    rec.q = q;
    rec.u = ControlVector::zero(p_.n, p_.m);
    rec.S = S;
    rec.residual = target_residual(p_, q);
    rec.hypersurface = hypersurface_residual(p_, q);
    rec.wall_seconds = elapsed(t0);
    return rec;
  }

  void keep(Trace& t, IterateRecord rec, bool boundary) const {
    if (cfg_.trace_level == TraceLevel::full ||
        (cfg_.trace_level == TraceLevel::summary && boundary)) {
      t.records.push_back(std::move(rec));
    }
  }

  void add_advisories(Trace& t, const LiftedState& q) const {
    if (cfg_.recipe != Recipe::ahu || !p_.is_lp) return;
    const SpectralReport rep = analyze(p_, q);
    std::ostringstream os;
    os << "ahu on a linear program: K_A has zero symmetric part and spectrum on "
          "the imaginary axis (max |Re| = "
       << rep.max_abs_real << ", positive_stable = "
       << (rep.positive_stable ? "true" : "false")
       << "); the AHU flow is not convergent for linear programs";
    t.advisories.push_back(os.str());
  }

  DirectionResult direction(const LiftedState& q, double delta) const {
    if (accelerated_ && cfg_.recipe == Recipe::accelerated) {
      return accel_direction(p_, q, cfg_.accel);
    }
    ControlSetSpec set = pair_.control;
    if (set.kind == ControlSetKind::rate_constrained) {
      return solve_direction_rate_constrained(pair_.slf, set, p_, q);
    }
    set.delta = delta;
    return solve_direction_quadratic(pair_.slf, set, p_, q);
  }

  JumpResult jump(const LiftedState& q, const DirectionResult& dir) const {
    if (dir.kicked) return velocity_kick_jump(p_, q, dir.u, cfg_.accel, cfg_.jump);
    return solve_jump(pair_.slf, p_, q, dir.u, cfg_.jump);
  }

  std::optional<StepFailure> step(const LiftedState& q, DirectionResult& dir,
                                  JumpResult& jr, int& evals) const {
    const double delta = pair_.control.delta;
    try {
      try {
        dir = direction(q, delta);
      } catch (const DescentFailure&) {
        ++evals;
        dir = direction(q, 0.5 * delta);
      }
      ++evals;
      try {
        jr = jump(q, dir);
      } catch (const LineFailure&) {
        if (pair_.control.kind != ControlSetKind::quadratic_metric) throw;
        dir = direction(q, 0.5 * delta);
        jr = jump(q, dir);
      }
      evals += jr.evals;
    } catch (const DescentFailure& e) {
      return StepFailure{Outcome::descent_failure, e.what()};
    } catch (const SingularityError& e) {
      std::ostringstream os;
      os << e.what() << " (rcond = " << e.rcond() << ")";
      return StepFailure{Outcome::descent_failure, os.str()};
    } catch (const GuidabilityFailure& e) {
      return StepFailure{Outcome::guidability_failure, e.what()};
    } catch (const LineFailure& e) {
      return StepFailure{Outcome::line_failure, e.what()};
    }
    return std::nullopt;
  }

  const ProblemSpec& p_;
  const GeneratorConfig& cfg_;
  RecipePair pair_;
  bool accelerated_ = false;
};

}  // namespace

const char* to_string(Recipe recipe) {
  switch (recipe) {
    case Recipe::gradient: return "gradient";
    case Recipe::sqp: return "sqp";
    case Recipe::ahu: return "ahu";
    case Recipe::sign_gradient: return "sign_gradient";
    case Recipe::accelerated: return "accelerated";
    case Recipe::custom: return "custom";
  }
  return "?";
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::converged: return "converged";
    case Outcome::max_iter: return "max_iter";
    case Outcome::line_failure: return "line_failure";
    case Outcome::guidability_failure: return "guidability_failure";
    case Outcome::descent_failure: return "descent_failure";
  }
  return "?";
}

const char* to_string(TraceLevel level) {
  switch (level) {
    case TraceLevel::none: return "none";
    case TraceLevel::summary: return "summary";
    case TraceLevel::full: return "full";
  }
  return "?";
}

Recipe recipe_from_string(const std::string& name) {
  for (Recipe r : {Recipe::gradient, Recipe::sqp, Recipe::ahu, Recipe::sign_gradient,
                   Recipe::accelerated}) {
    if (name == to_string(r)) return r;
  }
  throw ContractViolation("unknown recipe '" + name + "'");
}

TraceLevel trace_level_from_string(const std::string& name) {
  for (TraceLevel l : {TraceLevel::none, TraceLevel::summary, TraceLevel::full}) {
    if (name == to_string(l)) return l;
  }
  throw ContractViolation("unknown trace level '" + name + "'");
}

void GeneratorConfig::validate() const {
  detail::require(epsilon > 0.0, "epsilon must be > 0");
  detail::require(max_iter >= 1, "max_iter must be >= 1");
  detail::require(delta > 0.0, "delta must be > 0");
  if (recipe == Recipe::custom) {
    detail::require(slf.has_value() && control.has_value(),
                    "custom recipe needs both an SLF and a control set");
    control->validate();
  }
  if (recipe == Recipe::accelerated) {
    ControlSetSpec set;
    set.kind = ControlSetKind::rate_constrained;
    set.rate = accel.rate;
    set.validate();
  }
}

RecipePair recipe_pair(const GeneratorConfig& cfg) {
  RecipePair pair;
  pair.control.delta = cfg.delta;
  switch (cfg.recipe) {
    case Recipe::gradient:
      pair.control.metric = MetricRecipe::identity;
      break;
    case Recipe::sqp:
      pair.control.metric = MetricRecipe::sqp;
      break;
    case Recipe::ahu:
      pair.control.metric = MetricRecipe::ahu;
      break;
    case Recipe::sign_gradient:
      pair.slf.kind = SlfKind::l1_gradient;
      pair.control.metric = MetricRecipe::hessian;
      break;
    case Recipe::accelerated:
      pair.slf = accel_slf(cfg.accel);
      pair.control.kind = ControlSetKind::rate_constrained;
      pair.control.rate = cfg.accel.rate;
      break;
    case Recipe::custom:
      detail::require(cfg.slf.has_value() && cfg.control.has_value(),
                      "custom recipe needs both an SLF and a control set");
      pair.slf = *cfg.slf;
      pair.control = *cfg.control;
      break;
  }
  return pair;
}

void check_recipe_compatible(const ProblemSpec& p, Recipe recipe) {
  switch (recipe) {
    case Recipe::gradient:
    case Recipe::sqp:
    case Recipe::ahu:
      if (!p.is_equality_only) {
        throw IncompatibleRecipe(std::string(to_string(recipe)) +
                                 " recipe needs an equality-constrained problem");
      }
      break;
    case Recipe::sign_gradient:
    case Recipe::accelerated:
      if (p.m != 0) {
        throw IncompatibleRecipe(std::string(to_string(recipe)) +
                                 " recipe needs an unconstrained problem (m = 0)");
      }
      break;
    case Recipe::custom:
      break;
  }
}

Trace run(const ProblemSpec& p, const GeneratorConfig& cfg, const Vector& q1_guess,
          const Vector& q2_guess) {
  cfg.validate();
  check_recipe_compatible(p, cfg.recipe);
  return Loop(p, cfg).run(q1_guess, q2_guess);
}

Trace run(const ProblemSpec& p, const GeneratorConfig& cfg) {
  return run(p, cfg, p.start_q1, p.start_q2);
}

std::vector<ComparisonRow> compare(const ProblemSpec& p,
                                   const std::vector<GeneratorConfig>& cfgs,
                                   const std::vector<std::pair<Vector, Vector>>& guesses) {
  detail::require(!cfgs.empty(), "compare needs at least one config");
  std::vector<std::pair<Vector, Vector>> starts = guesses;
  if (starts.empty()) starts.emplace_back(p.start_q1, p.start_q2);
  std::vector<ComparisonRow> rows;
  for (const auto& cfg : cfgs) {
    for (const auto& [q1, q2] : starts) {
      const Trace t = run(p, cfg, q1, q2);
      rows.push_back({t.recipe, t.outcome, t.iterations, t.final_S,
                      t.final_residual.total, t.evals, t.seconds, t.cost_increased});
    }
  }
  return rows;
}

}  // namespace slfforge
