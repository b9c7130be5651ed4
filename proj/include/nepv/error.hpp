#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nepv
{

enum class ErrorKind
{
  ZeroVector,
  ZeroAlpha,
  MissingGradient,
  InvalidProblem,
  InvalidDirection,
  NotAnEigenvalue,
  NotAnEigenpair,
  NonSimple,
  ZeroEigenvalue,
  DegenerateWeights,
  MaxIterExceeded,
  SingularJacobian,
  InvalidDimension,
  InvalidSamples,
  InvalidInput,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-readable failure category.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string &what);

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace nepv
