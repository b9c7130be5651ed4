#include "nepv/error.hpp"

namespace nepv
{

std::string_view to_string(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::ZeroVector:
      return "ZeroVector";
    case ErrorKind::ZeroAlpha:
      return "ZeroAlpha";
    case ErrorKind::MissingGradient:
      return "MissingGradient";
    case ErrorKind::InvalidProblem:
      return "InvalidProblem";
    case ErrorKind::InvalidDirection:
      return "InvalidDirection";
    case ErrorKind::NotAnEigenvalue:
      return "NotAnEigenvalue";
    case ErrorKind::NotAnEigenpair:
      return "NotAnEigenpair";
    case ErrorKind::NonSimple:
      return "NonSimple";
    case ErrorKind::ZeroEigenvalue:
      return "ZeroEigenvalue";
    case ErrorKind::DegenerateWeights:
      return "DegenerateWeights";
    case ErrorKind::MaxIterExceeded:
      return "MaxIterExceeded";
    case ErrorKind::SingularJacobian:
      return "SingularJacobian";
    case ErrorKind::InvalidDimension:
      return "InvalidDimension";
    case ErrorKind::InvalidSamples:
      return "InvalidSamples";
    case ErrorKind::InvalidInput:
      return "InvalidInput";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string &what)
  : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
{
}

}  // namespace nepv
