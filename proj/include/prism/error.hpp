#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prism {

enum class ErrorKind {
  InvalidArgument,
  Io,
  Parse,
  Validation,
  TooShort,
  WindowTooSmall,
  WindowOutOfRange,
  Coverage,
  TooFewSamples,
  Numerical,
  BaselineNonPositive,
  DegenerateProjection,
  EmptyBand,
  ZeroPower,
  TooFewWindows,
  AllCandidatesFailed,
  Alignment,
  EmptyInput,
  Spec,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorKind::Coverage: return "CoverageError";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::Numerical: return "NumericalError";
    case ErrorKind::BaselineNonPositive: return "BaselineNonPositive";
    case ErrorKind::DegenerateProjection: return "DegenerateProjection";
    case ErrorKind::EmptyBand: return "EmptyBand";
    case ErrorKind::ZeroPower: return "ZeroPower";
    case ErrorKind::TooFewWindows: return "TooFewWindows";
    case ErrorKind::AllCandidatesFailed: return "AllCandidatesFailed";
    case ErrorKind::Alignment: return "AlignmentError";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::Spec: return "SpecError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace prism
