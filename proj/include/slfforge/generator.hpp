#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "slfforge/jump.hpp"
#include "slfforge/slf.hpp"

namespace slfforge {

enum class Recipe { gradient, sqp, ahu, sign_gradient, accelerated, custom };
enum class TraceLevel { none, summary, full };
enum class Outcome { converged, max_iter, line_failure, guidability_failure, descent_failure };

const char* to_string(Recipe recipe);
const char* to_string(Outcome outcome);
const char* to_string(TraceLevel level);
/// Throws ContractViolation on an unknown name.
Recipe recipe_from_string(const std::string& name);
TraceLevel trace_level_from_string(const std::string& name);

/// Second-order lift settings.
struct AccelConfig {
  /// Coupling k of the velocity SLF.
  double coupling = 1.0;
  RateSpec rate{RateKind::linear, 1.0, 0.5};
  /// false: v1 is tied to u1 and the run reduces to the gradient recipe.
  bool lift = true;
  bool allow_kick = true;
};

inline double default_epsilon() {
  return std::sqrt(std::numeric_limits<double>::epsilon());
}

struct GeneratorConfig {
  Recipe recipe = Recipe::gradient;
  /// Used when recipe == custom.
  std::optional<SlfSpec> slf;
  std::optional<ControlSetSpec> control;
  double epsilon = default_epsilon();
  int max_iter = 10000;
  TraceLevel trace_level = TraceLevel::full;
  double delta = 1.0;
  JumpConfig jump;
  AccelConfig accel;

  void validate() const;
};

/// The (S, U) pair a recipe stands for.
struct RecipePair {
  SlfSpec slf;
  ControlSetSpec control;
};
RecipePair recipe_pair(const GeneratorConfig& cfg);

struct IterateRecord {
  int k = 0;
  LiftedState q;
  ControlVector u;
  double h = 0.0;
  double S = 0.0;
  double DS = 0.0;
  TargetResidual residual;
  double hypersurface = 0.0;
  double wall_seconds = 0.0;
  int evals = 0;
  std::string jump_mode;
  std::string note;
};

struct Trace {
  std::string problem;
  std::string recipe;
  Outcome outcome = Outcome::max_iter;
  std::string detail;
  std::vector<std::string> advisories;
  /// Per-iteration records; the last one is the final state with h = 0.
  std::vector<IterateRecord> records;
  LiftedState final_state;
  int iterations = 0;
  double final_S = 0.0;
  TargetResidual final_residual;
  int evals = 0;
  double seconds = 0.0;
  double epsilon = 0.0;
  /// g0 rose on some accepted jump.
  bool cost_increased = false;
  /// Largest hypersurface residual seen across iterates.
  double max_hypersurface = 0.0;
  bool converged() const { return outcome == Outcome::converged; }
};

/// Steps 0-4 of the generator loop. Direction and jump failures end the run
/// and are reported through Trace::outcome. Throws IncompatibleRecipe.
Trace run(const ProblemSpec& p, const GeneratorConfig& cfg, const Vector& q1_guess,
          const Vector& q2_guess);

/// run() from the problem's registered start.
Trace run(const ProblemSpec& p, const GeneratorConfig& cfg);

struct ComparisonRow {
  std::string recipe;
  Outcome outcome = Outcome::max_iter;
  int iterations = 0;
  double final_S = 0.0;
  double final_residual = 0.0;
  int evals = 0;
  double seconds = 0.0;
  bool cost_increased = false;
};

/// Runs each config from every guess (q1, q2); an empty guess list uses the
/// registered start.
std::vector<ComparisonRow> compare(
    const ProblemSpec& p, const std::vector<GeneratorConfig>& cfgs,
    const std::vector<std::pair<Vector, Vector>>& guesses = {});

/// Throws IncompatibleRecipe when the recipe cannot run on p.
void check_recipe_compatible(const ProblemSpec& p, Recipe recipe);

}  // namespace slfforge
