#pragma once

#include <stdexcept>
#include <string>

namespace dephase {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  NotHermitian,
  NotPositive,
  NotNormalized,
  IncompleteKrausSet,
  InvalidScenario,
  UnsupportedPair,
  EquivalenceNotEstablished,
  InsufficientData,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::NotHermitian: return "NOT_HERMITIAN";
    case ErrorCode::NotPositive: return "NOT_POSITIVE";
    case ErrorCode::NotNormalized: return "NOT_NORMALIZED";
    case ErrorCode::IncompleteKrausSet: return "INCOMPLETE_KRAUS_SET";
    case ErrorCode::InvalidScenario: return "INVALID_SCENARIO";
    case ErrorCode::UnsupportedPair: return "UNSUPPORTED_PAIR";
    case ErrorCode::EquivalenceNotEstablished: return "EQUIVALENCE_NOT_ESTABLISHED";
    case ErrorCode::InsufficientData: return "INSUFFICIENT_DATA";
  }
  return "UNKNOWN";
}

/// Library exception. The code is stable and machine-checkable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dephase
