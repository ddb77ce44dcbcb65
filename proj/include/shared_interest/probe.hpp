#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "shared_interest/coverage.hpp"
#include "shared_interest/discretize.hpp"
#include "shared_interest/feature_set.hpp"
#include "shared_interest/saliency_field.hpp"

namespace si {

/// Per-class saliency for one input. Immutable after construction; the
/// per-rule discretization cache is shared across copies and safe for
/// concurrent readers.
class SaliencyStack {
 public:
  /// Defaults to one sigma above the mean of absolute values.
  static ThresholdRule default_rule() { return ThresholdRule::mean_plus_sigma(1.0, true); }

  SaliencyStack(std::string image_id, std::vector<std::string> class_names,
                std::vector<SaliencyField> fields, ThresholdRule rule = default_rule());

  const std::string& image_id() const noexcept { return image_id_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  const std::vector<SaliencyField>& fields() const noexcept { return fields_; }
  const ThresholdRule& rule() const noexcept { return rule_; }
  const Dims& dims() const { return fields_.front().dims(); }
  std::size_t class_count() const noexcept { return fields_.size(); }

  /// Discretized set per class under `rule`; computed once per rule.
  std::shared_ptr<const std::vector<FeatureSet>> discretized(const ThresholdRule& rule) const;

 private:
  struct Cache {
    std::shared_mutex mutex;
    std::map<std::string, std::shared_ptr<const std::vector<FeatureSet>>> by_rule;
  };

  std::string image_id_;
  std::vector<std::string> class_names_;
  std::vector<SaliencyField> fields_;
  ThresholdRule rule_;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

struct ProbeQuery {
  std::string image_id;
  FeatureSet annotation;
  Metric metric = Metric::iou;
  std::size_t k = 5;
};

struct ProbeEntry {
  std::size_t class_index = 0;
  std::string class_name;
  double score = 0.0;
  FeatureSet saliency_set;
};

struct ProbeResult {
  std::string image_id;
  Metric metric = Metric::iou;
  std::vector<ProbeEntry> ranking;  // non-increasing score, ties by class index
};

/// Ranks every class of `stack` by `query.metric` with the annotation as
/// ground truth, truncated to k. Uses the stack's rule unless one is given.
ProbeResult probe(const SaliencyStack& stack, const ProbeQuery& query);
ProbeResult probe(const SaliencyStack& stack, const ProbeQuery& query, const ThresholdRule& rule);

/// Stack manifest (JSON):
///   {"image_id": ..., "class_names": [...],
///    "packed": "stack.sit"  |  "files": ["c0.sit", ...],
///    "rule": "mean_plus_sigma=1", "abs": true}
/// Payload paths resolve against the manifest's directory.
SaliencyStack load_stack(const std::filesystem::path& manifest_path);

}  // namespace si
