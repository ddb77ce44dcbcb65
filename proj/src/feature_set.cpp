#include "shared_interest/feature_set.hpp"

#include <algorithm>
#include <iterator>
#include <string>

#include "shared_interest/error.hpp"

namespace si {

namespace {

void require_same_universe(const FeatureSet& a, const FeatureSet& b) {
  if (a.universe_size() != b.universe_size()) {
    throw Error(ErrorCode::structural, "universe mismatch: " + std::to_string(a.universe_size()) +
                                           " vs " + std::to_string(b.universe_size()));
  }
}

}  // namespace

FeatureSet::FeatureSet(std::size_t universe_size, std::vector<FeatureIndex> members)
    : universe_size_(universe_size), members_(std::move(members)) {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (members_[i] >= universe_size_) {
      throw Error(ErrorCode::invalid_argument,
                  "feature index " + std::to_string(members_[i]) + " outside universe of " +
                      std::to_string(universe_size_));
    }
    if (i > 0 && members_[i] <= members_[i - 1]) {
      throw Error(ErrorCode::invalid_argument, "feature indices must be strictly increasing");
    }
  }
}

FeatureSet FeatureSet::from_unsorted(std::size_t universe_size, std::vector<FeatureIndex> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return FeatureSet(universe_size, std::move(indices));
}

FeatureSet FeatureSet::range(std::size_t universe_size, FeatureIndex first, FeatureIndex last) {
  std::vector<FeatureIndex> members;
  if (last > first) {
    members.reserve(last - first);
    for (FeatureIndex i = first; i < last; ++i) members.push_back(i);
  }
  return FeatureSet(universe_size, std::move(members));
}

FeatureSet FeatureSet::from_mask(std::span<const std::uint8_t> mask) {
  std::vector<FeatureIndex> members;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] > 1) {
      throw Error(ErrorCode::invalid_argument,
                  "mask value " + std::to_string(mask[i]) + " at index " + std::to_string(i) +
                      " is not 0 or 1");
    }
    if (mask[i] == 1) members.push_back(static_cast<FeatureIndex>(i));
  }
  FeatureSet set(mask.size());
  set.members_ = std::move(members);
  return set;
}

bool FeatureSet::contains(FeatureIndex index) const {
  return std::binary_search(members_.begin(), members_.end(), index);
}

std::vector<std::uint8_t> FeatureSet::to_mask() const {
  std::vector<std::uint8_t> mask(universe_size_, 0);
  for (FeatureIndex i : members_) mask[i] = 1;
  return mask;
}

FeatureSet intersect(const FeatureSet& a, const FeatureSet& b) {
  require_same_universe(a, b);
  std::vector<FeatureIndex> out;
  std::set_intersection(a.members().begin(), a.members().end(), b.members().begin(),
                        b.members().end(), std::back_inserter(out));
  return FeatureSet(a.universe_size(), std::move(out));
}

FeatureSet unite(const FeatureSet& a, const FeatureSet& b) {
  require_same_universe(a, b);
  std::vector<FeatureIndex> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.members().begin(), a.members().end(), b.members().begin(), b.members().end(),
                 std::back_inserter(out));
  return FeatureSet(a.universe_size(), std::move(out));
}

std::size_t intersection_size(const FeatureSet& a, const FeatureSet& b) {
  require_same_universe(a, b);
  const auto& x = a.members();
  const auto& y = b.members();
  std::size_t i = 0, j = 0, n = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] < y[j]) {
      ++i;
    } else if (y[j] < x[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace si
