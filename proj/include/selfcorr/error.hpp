#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace selfcorr {

enum class ErrorKind {
  EmptyOrSingleton,
  DimensionMismatch,
  SizeMismatch,
  CholeskyFailure,
  EigFailure,
  EmptySynthSet,
  EmptyInput,
  InvalidArgument,
  InvalidDelta,
  NonPositiveLogArgument,
  ParseError,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyOrSingleton: return "EmptyOrSingleton";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::CholeskyFailure: return "CholeskyFailure";
    case ErrorKind::EigFailure: return "EigFailure";
    case ErrorKind::EmptySynthSet: return "EmptySynthSet";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidDelta: return "InvalidDelta";
    case ErrorKind::NonPositiveLogArgument: return "NonPositiveLogArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace selfcorr
