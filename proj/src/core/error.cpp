#include "core/error.hpp"

namespace psnspd {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::SingularMatrix: return "singular_matrix";
    case ErrorCode::NotConverged: return "not_converged";
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::Internal: return "internal_error";
  }
  return "unknown_error";
}

}  // namespace psnspd
