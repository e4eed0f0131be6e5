#pragma once

#include <stdexcept>
#include <string>

namespace toricflow {

enum class ErrorCode {
  InvalidInput,
  ParseError,
  NonPrimitiveNormal,
  Unbounded,
  EmptyInterior,
  RedundantFacet,
  NonSimpleVertex,
  NonUnimodularVertex,
  SpacingTooCoarse,
  OutOfDomain,
  ChartMismatch,
  SingularHessian,
  SingularMomentMatrix,
  EmptyFamily,
  StepUnderflow,
  NonConvexStart,
  TraceTooShort,
  SegmentLeavesPolytope,
  NegativeAffineFactor,
  NonAdmissibleWeight,
  PreconditionFailed,
};

const char* error_name(ErrorCode code);

// Validation errors map to CLI exit status 2, numerical failures to 3.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace toricflow
