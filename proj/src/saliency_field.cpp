#include "shared_interest/saliency_field.hpp"

#include <cmath>

#include "shared_interest/error.hpp"

namespace si {

std::size_t element_count(const Dims& dims) {
  if (dims.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  return n;
}

std::string format_dims(const Dims& dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i > 0) out += 'x';
    out += std::to_string(dims[i]);
  }
  return out.empty() ? "()" : out;
}

SaliencyField::SaliencyField(Dims dims, std::vector<float> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  if (element_count(dims_) != values_.size()) {
    throw Error(ErrorCode::structural, "saliency dims " + format_dims(dims_) + " hold " +
                                           std::to_string(element_count(dims_)) +
                                           " values but " + std::to_string(values_.size()) +
                                           " were given");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::invalid_argument,
                  "non-finite saliency value at index " + std::to_string(i));
    }
  }
}

}  // namespace si
