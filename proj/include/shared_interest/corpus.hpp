#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "shared_interest/coverage.hpp"
#include "shared_interest/discretize.hpp"
#include "shared_interest/feature_set.hpp"
#include "shared_interest/saliency_field.hpp"
#include "shared_interest/taxonomy.hpp"

namespace si {

inline constexpr int kManifestVersion = 1;

enum class Modality { image, text };

std::string_view to_string(Modality modality);

struct InstanceRecord {
  std::string id;
  Modality modality = Modality::image;
  Dims dims;
  Outcome outcome;
  std::string gt_ref;
  std::string saliency_ref;
  std::optional<std::string> image_ref;
  std::vector<std::string> tokens;
};

/// A loaded instance. Saliency is either a continuous field or a set that
/// was discretized upstream (e.g. SIS rationales).
struct Instance {
  InstanceRecord record;
  FeatureSet ground_truth;
  std::variant<SaliencyField, FeatureSet> saliency;
};

struct Diagnostic {
  std::size_t line = 0;  // 1-based manifest line, 0 when not line-bound
  std::string id;
  std::string message;
};

std::ostream& operator<<(std::ostream& os, const Diagnostic& d);

struct Corpus {
  std::filesystem::path data_root;
  std::vector<Instance> instances;

  std::size_t size() const noexcept { return instances.size(); }
};

struct LoadResult {
  Corpus corpus;
  std::vector<Diagnostic> diagnostics;
};

struct LoadOptions {
  // Strict loads throw on the first bad record; otherwise bad records are
  // skipped and reported.
  bool strict = false;
  double default_delta = kDefaultRegressionDelta;
};

/// Parses one manifest line. Relative payload paths are kept as written.
InstanceRecord parse_manifest_record(const std::string& line, double default_delta);

LoadResult load_corpus(const std::filesystem::path& manifest_path,
                       const std::filesystem::path& data_root, const LoadOptions& options = {});

struct ScoredInstance {
  const Instance* instance = nullptr;
  CoverageScores scores;
  bool correct = false;
  BehaviorCase behavior = BehaviorCase::uncategorized;
  FeatureSet saliency_set;
  ThresholdRule rule;  // as applied, with gt_size resolved

  const InstanceRecord& record() const { return instance->record; }
  bool empty_saliency() const { return scores.empty_saliency; }
};

struct ScoreResult {
  std::vector<ScoredInstance> scored;
  std::vector<Diagnostic> diagnostics;
};

/// Scores instances in manifest order. `threads` > 1 parallelizes without
/// changing the output. The corpus must outlive the result.
ScoreResult score_corpus(const Corpus& corpus, const ThresholdRule& rule,
                         const CaseThresholds& thresholds, unsigned threads = 1);

/// Scores a single instance; throws on failure.
ScoredInstance score_instance(const Instance& instance, const ThresholdRule& rule,
                              const CaseThresholds& thresholds);

struct MetricRange {
  Metric metric = Metric::iou;
  double min = 0.0;
  double max = 1.0;
};

struct InstanceFilter {
  std::optional<BehaviorCase> behavior;
  std::optional<std::string> label;
  std::optional<std::string> prediction;
  std::optional<bool> correct;
  std::optional<MetricRange> range;  // inclusive at both ends
};

enum class SortKey { manifest, id, iou, gtc, sc };
enum class SortDirection { ascending, descending };

std::optional<SortKey> parse_sort_key(std::string_view name);
std::optional<SortDirection> parse_direction(std::string_view name);

struct InstanceSort {
  SortKey key = SortKey::manifest;
  SortDirection direction = SortDirection::ascending;
};

/// Conjunctive filters, then a stable sort (ties keep manifest order).
/// Throws ErrorCode::unknown_key for a label or prediction that does not
/// occur in `scored`.
std::vector<const ScoredInstance*> filter_sort(const std::vector<ScoredInstance>& scored,
                                               const InstanceFilter& filter,
                                               const InstanceSort& sort = {});

struct ScoreHistogram {
  Metric metric = Metric::iou;
  std::array<double, 11> bin_edges{};
  std::array<std::size_t, 10> counts{};
};

/// Bins [0,0.1), ..., [0.9,1.0]. Throws ErrorCode::invalid_argument on an
/// empty input.
ScoreHistogram histogram(const std::vector<ScoredInstance>& scored, Metric metric);
std::size_t histogram_bin(double value);

using CaseCounts = std::array<std::size_t, kAllCases.size()>;
CaseCounts case_summary(const std::vector<ScoredInstance>& scored);

enum class ReportFormat { jsonl, csv };
std::optional<ReportFormat> parse_report_format(std::string_view name);

inline constexpr const char* kCsvHeader = "id,label,prediction,correct,iou,gtc,sc,case,flags";

/// One row per instance; scores with six decimals. Flags are
/// ';'-separated in CSV and an array in JSONL.
void export_report(std::ostream& out, const std::vector<ScoredInstance>& scored,
                   ReportFormat format);
void export_report(const std::filesystem::path& path, const std::vector<ScoredInstance>& scored,
                   ReportFormat format);

std::vector<std::string> instance_flags(const ScoredInstance& s);
std::string csv_escape(std::string_view field);
std::string format_score(double value);  // "0.500000"

}  // namespace si
