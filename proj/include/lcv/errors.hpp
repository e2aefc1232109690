#pragma once

#include <stdexcept>
#include <string>

namespace lcv {

// Machine-readable failure categories. Every exception thrown by the library
// carries one of these so callers (and the CLI) can map failures to exit
// codes and structured error reports without parsing messages.
enum class ErrorCode {
  DimensionMismatch,
  NotPsd,
  EmptyCone,
  UnsupportedDiagnostic,
  InvalidShift,
  SingularSystem,
  MaxIterExceeded,
  NonConvergence,
  ParseError,
  InvalidArgument,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::EmptyCone: return "EmptyCone";
    case ErrorCode::UnsupportedDiagnostic: return "UnsupportedDiagnostic";
    case ErrorCode::InvalidShift: return "InvalidShift";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lcv
