#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "shared_interest/feature_set.hpp"
#include "shared_interest/saliency_field.hpp"

namespace si {

enum class RuleKind { mean_plus_sigma, top_fraction, top_n, gt_size, positive_top_n };

/// How a continuous saliency field becomes a discrete feature set.
///
/// `parameter` is k for mean_plus_sigma, p for top_fraction and n for the
/// top_n variants; gt_size carries no parameter and must be resolved against
/// the ground-truth cardinality before use (see resolve_gt_size).
struct ThresholdRule {
  RuleKind kind = RuleKind::mean_plus_sigma;
  double parameter = 1.0;
  bool take_absolute = false;

  static ThresholdRule mean_plus_sigma(double k, bool take_absolute = false);
  static ThresholdRule top_fraction(double p, bool take_absolute = false);
  static ThresholdRule top_n(std::size_t n, bool take_absolute = false);
  static ThresholdRule gt_size(bool take_absolute = false);
  static ThresholdRule positive_top_n(std::size_t n);

  /// Throws ErrorCode::invalid_argument when the parameter is out of range.
  void validate() const;

  friend bool operator==(const ThresholdRule&, const ThresholdRule&) = default;
};

/// Parses "mean_plus_sigma=1", "top_fraction=0.25", "top_n=10", "gt_size",
/// "positive_top_n=5". The absolute-value switch is separate.
ThresholdRule parse_rule(std::string_view text, bool take_absolute = false);
std::string to_string(const ThresholdRule& rule);

/// gt_size becomes top_n(ground_truth_size); other rules pass through.
ThresholdRule resolve_gt_size(const ThresholdRule& rule, std::size_t ground_truth_size);

struct FieldStats {
  double mean = 0.0;
  double sigma = 0.0;  // population (divide-by-N) standard deviation
};

FieldStats population_stats(const SaliencyField& field, bool take_absolute);

/// Score-based discretization. Ranking ties go to the lower index.
FeatureSet discretize_score_based(const SaliencyField& field, const ThresholdRule& rule);

/// Model confidence in the originally predicted class when only `subset`
/// is kept. Implementations throw to signal failure.
class ConfidenceOracle {
 public:
  virtual ~ConfidenceOracle() = default;
  virtual double confidence(const FeatureSet& subset) = 0;
};

struct ModelBasedResult {
  FeatureSet features;
  bool converged = false;
  std::size_t queries = 0;
};

/// Adds positively scored features in descending score order, one per step,
/// until the oracle reports at least `confidence_threshold`.
///
/// Returns the first subset that crosses the threshold. If none does, returns
/// every positive feature with `converged == false`. Oracle exceptions are
/// rethrown as ErrorCode::oracle.
ModelBasedResult discretize_model_based(const SaliencyField& field, ConfidenceOracle& oracle,
                                        double confidence_threshold);

}  // namespace si
