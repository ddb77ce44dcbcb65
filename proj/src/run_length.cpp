#include "shared_interest/run_length.hpp"

#include <string>

#include "shared_interest/error.hpp"

namespace si {

std::vector<Run> encode_runs(const FeatureSet& set) {
  std::vector<Run> runs;
  for (FeatureIndex i : set.members()) {
    if (!runs.empty() && runs.back().first + runs.back().second == i) {
      ++runs.back().second;
    } else {
      runs.emplace_back(i, 1);
    }
  }
  return runs;
}

FeatureSet decode_runs(const std::vector<Run>& runs, std::size_t universe_size) {
  std::vector<FeatureIndex> members;
  std::size_t next_free = 0;
  for (const auto& [start, length] : runs) {
    if (length == 0) throw Error(ErrorCode::invalid_argument, "run of length 0");
    if (start < next_free) {
      throw Error(ErrorCode::invalid_argument, "runs must be ascending and non-overlapping");
    }
    if (start + length > universe_size) {
      throw Error(ErrorCode::invalid_argument,
                  "run [" + std::to_string(start) + ", +" + std::to_string(length) +
                      ") exceeds universe of " + std::to_string(universe_size));
    }
    for (std::size_t i = 0; i < length; ++i) members.push_back(static_cast<FeatureIndex>(start + i));
    next_free = start + length;
  }
  return FeatureSet(universe_size, std::move(members));
}

}  // namespace si
