#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace si {

using FeatureIndex = std::uint32_t;

/// A set of feature indices over a flattened, row-major feature universe
/// (pixels for images, token positions for text).
///
/// Members are kept sorted and duplicate-free; every constructor validates
/// this, so set algebra below can assume it.
class FeatureSet {
 public:
  FeatureSet() = default;
  explicit FeatureSet(std::size_t universe_size) : universe_size_(universe_size) {}

  /// Takes sorted, strictly increasing members; throws si::Error otherwise.
  FeatureSet(std::size_t universe_size, std::vector<FeatureIndex> members);

  /// Sorts and deduplicates arbitrary indices. Out-of-range indices throw.
  static FeatureSet from_unsorted(std::size_t universe_size, std::vector<FeatureIndex> indices);

  /// Half-open range [first, last).
  static FeatureSet range(std::size_t universe_size, FeatureIndex first, FeatureIndex last);

  /// Nonzero entries of a mask are members. Entries must be 0 or 1.
  static FeatureSet from_mask(std::span<const std::uint8_t> mask);

  std::size_t universe_size() const noexcept { return universe_size_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  const std::vector<FeatureIndex>& members() const noexcept { return members_; }

  bool contains(FeatureIndex index) const;
  std::vector<std::uint8_t> to_mask() const;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  std::size_t universe_size_ = 0;
  std::vector<FeatureIndex> members_;
};

FeatureSet intersect(const FeatureSet& a, const FeatureSet& b);
FeatureSet unite(const FeatureSet& a, const FeatureSet& b);

/// |a ∩ b| without materializing the intersection.
std::size_t intersection_size(const FeatureSet& a, const FeatureSet& b);

}  // namespace si
