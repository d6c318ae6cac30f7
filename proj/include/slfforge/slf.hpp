#pragma once

#include <string>

#include "slfforge/dynamics.hpp"
#include "slfforge/problem.hpp"

namespace slfforge {

enum class SlfKind { quadratic_residual, l1_gradient, velocity_augmented };

/// Search Lyapunov function.
///
///   quadratic_residual:  S = 1/2 |q3|^2 + 1/2 |q4 - gL|^2  (equality-only)
///   l1_gradient:         S = |q3|_1                         (m = 0)
///   velocity_augmented:  S = 1/2 |q3|^2 + 1/2 |v1 - k q3|^2 (m = 0)
///
/// gL is the equality target, zero for problems written as g(q1) = 0. The
/// coupling k of the velocity SLF defaults to 1; k = 0 gives the plain
/// kinetic-plus-residual form.
struct SlfSpec {
  SlfKind kind = SlfKind::quadratic_residual;
  double coupling = 1.0;
};

enum class ControlSetKind { quadratic_metric, rate_constrained };
enum class MetricRecipe { identity, sqp, ahu, hessian, explicit_matrix };
enum class RateKind { linear, bhat_bernstein };

struct RateSpec {
  RateKind kind = RateKind::linear;
  double kappa = 1.0;
  double alpha = 0.5;

  /// Required decrease rate R(S): kappa S or kappa S^alpha.
  double eval(double s) const;
};

/// Control set U. quadratic_metric is {u : u^T W u <= delta}; the
/// rate_constrained set admits every u meeting DS <= -R(S) and selects the
/// minimum-norm element.
struct ControlSetSpec {
  ControlSetKind kind = ControlSetKind::quadratic_metric;
  MetricRecipe metric = MetricRecipe::identity;
  Matrix explicit_w;
  double delta = 1.0;
  RateSpec rate;

  /// Throws ContractViolation on a bad radius, gain, exponent or W.
  void validate() const;
};

struct DirectionResult {
  ControlVector u;
  double ds = 0.0;
  double sigma = 1.0;
  double metric_rcond = 1.0;
  std::string recipe;
  bool regularized = false;
  /// Accelerated mode: bound unreachable but drift alone descends, so u = 0.
  bool rate_relaxed = false;
  /// Accelerated mode: the velocity-kick fallback produced this control.
  bool kicked = false;
};

/// The direction solver could not certify a decrease (DS >= 0).
class DescentFailure : public Error {
 public:
  DescentFailure(const std::string& what, DirectionResult result)
      : Error(what), result_(std::move(result)) {}
  const DirectionResult& result() const { return result_; }

 private:
  DirectionResult result_;
};

/// DS written as <c, (u1, u2)> + d with u0 = 0.
struct LinearRate {
  Vector c;
  double d = 0.0;
};

const char* to_string(SlfKind kind);
const char* to_string(MetricRecipe metric);
const char* to_string(RateKind kind);

/// Throws IncompatibleRecipe when the SLF does not fit the problem or state.
void check_slf_compatible(const SlfSpec& s, const ProblemSpec& p,
                          const LiftedState& q);

double slf_value(const SlfSpec& s, const ProblemSpec& p, const LiftedState& q);

/// Gradient of S with respect to q_a, in ControlJacobian row order. For the
/// l1 SLF this is the sign vector (zero on kinks).
Vector slf_gradient(const SlfSpec& s, const ProblemSpec& p,
                    const LiftedState& q);

/// DS(q, u). Smooth kinds use <dS/dq_a, B u + drift>; the l1 SLF takes the
/// subgradient element minimizing the pairing on coordinates where q3_i = 0.
double slf_directional_derivative(const SlfSpec& s, const ProblemSpec& p,
                                  const LiftedState& q, const ControlVector& u);

/// Coefficients of DS as an affine function of (u1, u2); smooth part only.
LinearRate slf_rate_terms(const SlfSpec& s, const ProblemSpec& p,
                          const LiftedState& q);

/// K_A = [[H, -J^T], [J, 0]] or K_S = [[H, J^T], [J, 0]].
Matrix assemble_kkt(const ProblemSpec& p, const LiftedState& q, bool symmetric);

/// Minimizer of DS over the quadratic control set, on its boundary.
DirectionResult solve_direction_quadratic(const SlfSpec& s,
                                          const ControlSetSpec& c,
                                          const ProblemSpec& p,
                                          const LiftedState& q);

/// Minimum-norm control with DS <= -R(S).
DirectionResult solve_direction_rate_constrained(const SlfSpec& s,
                                                 const ControlSetSpec& c,
                                                 const ProblemSpec& p,
                                                 const LiftedState& q);

/// rcond below which a KKT matrix is treated as singular.
inline constexpr double kSingularRcond = 1e3 * std::numeric_limits<double>::epsilon();

}  // namespace slfforge
