#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace si {

enum class ErrorCode {
  structural,          // universe or dimension mismatch between operands
  invalid_annotation,  // ground truth with no features
  invalid_argument,    // parameter outside its documented range
  empty_field,
  oracle,
  malformed_tensor,
  malformed_manifest,
  io,
  not_found,
  duplicate_id,
  unknown_key,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace si
