#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace proxdi {

/// Base class for every library error. All errors carry a human-readable
/// message; some carry extra payload (witness points, residuals).
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A nonconvex set was queried outside its projection uniqueness tube
/// (distance to the set >= prox-regularity constant r).
struct TubeViolation : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

/// Finite-difference tangent-cone projection did not stabilize.
struct NonconvergedFD : Error {
  using Error::Error;
};

/// A linear map required to be nonzero / full rank is degenerate.
struct SingularMap : Error {
  using Error::Error;
};

/// Catching-up predictor would leave the uniqueness tube: h*||f(x)|| >= r/2.
struct StepTooLarge : Error {
  using Error::Error;
};

/// Cap search for the shifted-operator bound m exceeded its ceiling.
struct CapSearchOverflow : Error {
  using Error::Error;
};

/// The brute-force resolvent found no point with residual below the floor;
/// carries the best candidate found (signals the cap m is too small).
struct NoSolutionInGrid : Error {
  NoSolutionInGrid(const std::string& msg, Eigen::VectorXd best, double floor)
      : Error(msg), best_point(std::move(best)), residual_floor(floor) {}
  Eigen::VectorXd best_point;
  double residual_floor;
};

/// A Lyapunov candidate was evaluated outside C, or its declared domain is
/// not contained in C.
struct DomainViolation : Error {
  using Error::Error;
};

/// A claimed subset S of C has sampled points outside C.
struct SubsetViolation : Error {
  using Error::Error;
};

struct NotPD : Error {
  using Error::Error;
};

struct RadiusViolation : Error {
  using Error::Error;
};

/// An observer-theorem hypothesis failed; names the first failing condition.
struct HypothesisViolation : Error {
  using Error::Error;
};

/// Constraint qualification failure (H not full row rank).
struct QualificationFailure : Error {
  using Error::Error;
};

/// A pointwise stability condition failed; carries the witness.
struct ConditionFailed : Error {
  ConditionFailed(const std::string& msg, Eigen::VectorXd w)
      : Error(msg), witness(std::move(w)) {}
  Eigen::VectorXd witness;
};

struct ParseError : Error {
  ParseError(int line_no, const std::string& msg)
      : Error("parse error at line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}
  int line;
};

struct ValidationError : Error {
  ValidationError(const std::string& field_name, const std::string& msg)
      : Error("invalid field '" + field_name + "': " + msg), field(field_name) {}
  std::string field;
};

}  // namespace proxdi
