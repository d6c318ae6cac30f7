#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "slfforge/problem.hpp"

namespace slfforge {

/// Relative size below which a real part is treated as zero.
inline constexpr double kStabilityTol = 1e-12;

struct SpectralReport {
  std::vector<std::complex<double>> eigenvalues;
  bool positive_stable = false;
  bool all_real_positive = false;
  bool benzi_simoncini_holds = false;
  bool hessian_positive_definite = false;
  bool full_row_rank = false;
  std::optional<double> lambda_min;
  std::optional<double> schur_norm;
  double max_abs_real = 0.0;
  double max_abs_imag = 0.0;
  /// Why the Benzi-Simoncini branch did not apply, if it did not.
  std::string reason;
};

/// Spectrum of K_A = [[H, -J^T], [J, 0]] and the Benzi-Simoncini test
/// H > 0, J full row rank, lambda_min(H) >= 4 |J H^{-1} J^T|_2.
SpectralReport analyze_matrices(const Matrix& H, const Matrix& J);

/// analyze_matrices at the Lagrangian Hessian and constraint Jacobian of q.
/// Requires an equality-only problem.
SpectralReport analyze(const ProblemSpec& p, const LiftedState& q);

/// Norm history of the residual pair r = (q3, q4 - gL) along the AHU flow.
struct FlowReport {
  int steps = 0;
  double dt = 0.0;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  double min_norm = 0.0;
  double max_norm = 0.0;
  double min_relative = 1.0;
  double final_relative = 1.0;
};

/// Integrates r' = -K_A^T r with classical RK4 from the registered start of
/// a quadratic equality-constrained problem (K_A is constant there).
FlowReport ahu_flow_demo(const ProblemSpec& p, int steps, double dt);

/// ahu_flow_demo restricted to linear programs.
FlowReport lp_divergence_demo(const ProblemSpec& p, int steps, double dt);

}  // namespace slfforge
