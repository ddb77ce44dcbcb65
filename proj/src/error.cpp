#include "shared_interest/error.hpp"

namespace si {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::structural: return "structural";
    case ErrorCode::invalid_annotation: return "invalid_annotation";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::empty_field: return "empty_field";
    case ErrorCode::oracle: return "oracle";
    case ErrorCode::malformed_tensor: return "malformed_tensor";
    case ErrorCode::malformed_manifest: return "malformed_manifest";
    case ErrorCode::io: return "io";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::unknown_key: return "unknown_key";
  }
  return "unknown";
}

}  // namespace si
