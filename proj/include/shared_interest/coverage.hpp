#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "shared_interest/feature_set.hpp"

namespace si {

enum class Metric { iou, gtc, sc };

std::string_view to_string(Metric metric);
std::optional<Metric> parse_metric(std::string_view name);

struct CoverageScores {
  double iou = 0.0;
  double gtc = 0.0;
  double sc = 0.0;
  std::size_t intersection_size = 0;
  std::size_t union_size = 0;
  // Set when the saliency set was empty; all three scores are then zero.
  bool empty_saliency = false;

  double value(Metric metric) const;
};

/// Scores ground truth `g` against saliency `s`.
///
/// iou = |G∩S| / |G∪S|, gtc = |G∩S| / |G|, sc = |G∩S| / |S|.
/// Counts stay integral until the final division. An empty `s` yields zeros
/// with `empty_saliency` set. Throws ErrorCode::structural on a universe
/// mismatch and ErrorCode::invalid_annotation when `g` is empty.
CoverageScores compute_coverage(const FeatureSet& g, const FeatureSet& s);

}  // namespace si
