#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "shared_interest/feature_set.hpp"

namespace si {

/// (start, length) of a maximal block of consecutive member indices.
using Run = std::pair<FeatureIndex, std::size_t>;

std::vector<Run> encode_runs(const FeatureSet& set);

/// Runs must be non-empty, ascending and non-overlapping, and lie inside the
/// universe. Adjacent runs are accepted.
FeatureSet decode_runs(const std::vector<Run>& runs, std::size_t universe_size);

}  // namespace si
