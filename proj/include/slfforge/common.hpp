#pragma once

#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace slfforge {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on sizes or argument ranges was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A data-function evaluator threw or produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// The cost multiplier q0 is not strictly positive.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// A problem could not be found in the registry or parsed from a file.
class ProblemLoadError : public Error {
 public:
  using Error::Error;
};

/// The requested recipe or SLF kind does not apply to the problem.
class IncompatibleRecipe : public Error {
 public:
  using Error::Error;
};

/// The search metric (or KKT matrix backing it) is numerically singular.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double rcond)
      : Error(what), rcond_(rcond) {}
  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

/// No control in the admissible set satisfies the rate constraint.
class GuidabilityFailure : public Error {
 public:
  using Error::Error;
};

/// The jump-size search found no acceptable step.
class LineFailure : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

inline void require_size(Eigen::Index actual, Eigen::Index expected,
                         const char* name) {
  if (actual != expected) {
    throw ContractViolation(std::string(name) + ": expected size " +
                            std::to_string(expected) + ", got " +
                            std::to_string(actual));
  }
}

std::string format_vector(const Vector& v);

}  // namespace detail

}  // namespace slfforge
