#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fofpls {

enum class ErrorKind {
  InvalidConfiguration,
  InvalidGrid,
  NotPositiveSemidefinite,
  SingularMetric,
  UnderdeterminedProjection,
  GridMismatch,
  InvalidTerm,
  TooManyComponents,
  DegenerateDesign,
  ConvergenceFailure,
  DesignMismatch,
  InvalidInput,
  NothingToExtend,
  InsufficientData,
  ShapeMismatch,
  NearZeroDenominator,
  UndefinedR2,
  NumericalFailure,
  UnknownSetting,
  Io,
  Parse,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fofpls
