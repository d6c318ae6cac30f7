#pragma once

#include <string>
#include <vector>

#include "slfforge/problem.hpp"

namespace slfforge {

/// Registered problem with a hand-solved KKT point.
struct CorpusEntry {
  ProblemSpec spec;
  Vector kkt_q1;
  Vector kkt_q2;
  /// Recipes whose SLF hypotheses hold from the registered start; the
  /// convergence contract is asserted on these pairs.
  std::vector<std::string> certified_recipes;
};

/// Names in registration order.
std::vector<std::string> registry_names();

/// Throws ProblemLoadError for unknown names.
CorpusEntry corpus_entry(const std::string& name);

/// Dense QP/LP: g0 = x^T Q x / 2 + c^T x, g = A x - b, gL <= g <= gU.
ProblemSpec make_quadratic_problem(const std::string& name, const Matrix& Q,
                                   const Vector& c, const Matrix& A,
                                   const Vector& b, const Vector& gL,
                                   const Vector& gU);

/// Parses the problem-file schema from JSON text. Throws ProblemLoadError.
ProblemSpec problem_from_json_text(const std::string& text, const std::string& name);

/// Registry name or path to a problem file. Throws ProblemLoadError.
ProblemSpec load_problem(const std::string& source);

}  // namespace slfforge
