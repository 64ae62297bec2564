#pragma once

#include <stdexcept>
#include <string>

namespace parkseg {

enum class ErrorKind {
  InvalidPalette,
  MalformedImage,
  UnknownColor,
  AmbiguousColor,
  UnknownClassId,
  UnknownClass,
  UnknownComponentId,
  EvenKernel,
  MissingRole,
  MissingParkedTarget,
  DimensionMismatch,
  BadDistribution,
  AllUndefined,
  BadScale,
  BadFactor,
  OutOfBounds,
  OverlappingCars,
  InvalidScene,
  Infeasible,
  BadConfig,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace parkseg
