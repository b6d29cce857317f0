#pragma once

#include <stdexcept>
#include <string>

namespace blockent {

enum class ErrorCode {
  kInvalidBlockLength,
  kCannotMarginalize,
  kDimensionMismatch,
  kInvalidConfig,
  kOutOfValidity,
  kTooLarge,
  kNotAType,
  kEmptyTable,
  kNonStationary,
  kSupport,
  kReducible,
  kConvergence,
  kEmptyGrid,
  kNumeric,
  kIo,
};

// Validation errors map to CLI exit code 1, numeric failures to 2.
inline bool is_numeric_failure(ErrorCode code) {
  return code == ErrorCode::kConvergence || code == ErrorCode::kNumeric;
}

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace blockent
