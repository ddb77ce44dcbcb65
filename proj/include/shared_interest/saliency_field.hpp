#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace si {

using Dims = std::vector<std::size_t>;

std::size_t element_count(const Dims& dims);
std::string format_dims(const Dims& dims);  // "32x32"

/// Continuous per-feature importance scores, row-major over `dims`.
class SaliencyField {
 public:
  SaliencyField() = default;
  /// Throws ErrorCode::structural if the element count does not match `dims`
  /// and ErrorCode::invalid_argument on a non-finite value.
  SaliencyField(Dims dims, std::vector<float> values);

  const Dims& dims() const noexcept { return dims_; }
  const std::vector<float>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  friend bool operator==(const SaliencyField&, const SaliencyField&) = default;

 private:
  Dims dims_;
  std::vector<float> values_;
};

}  // namespace si
