#include "blockent/error.hpp"

namespace blockent {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidBlockLength: return "invalid-block-length";
    case ErrorCode::kCannotMarginalize: return "cannot-marginalize";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kOutOfValidity: return "out-of-validity";
    case ErrorCode::kTooLarge: return "too-large";
    case ErrorCode::kNotAType: return "not-a-type";
    case ErrorCode::kEmptyTable: return "empty-table";
    case ErrorCode::kNonStationary: return "non-stationary";
    case ErrorCode::kSupport: return "support";
    case ErrorCode::kReducible: return "reducible";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kEmptyGrid: return "empty-grid";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace blockent
