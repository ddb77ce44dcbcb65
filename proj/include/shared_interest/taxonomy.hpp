#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "shared_interest/coverage.hpp"

namespace si {

enum class Task { classification, regression };

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view name);

inline constexpr double kDefaultRegressionDelta = 0.05;

/// Ground-truth label and model output for one instance. Classification
/// uses class names, regression uses real values.
struct Outcome {
  Task task = Task::classification;
  std::variant<std::string, double> label;
  std::variant<std::string, double> prediction;
  double delta = kDefaultRegressionDelta;

  static Outcome classification(std::string label, std::string prediction);
  static Outcome regression(double label, double prediction, double delta = kDefaultRegressionDelta);
};

/// Throws ErrorCode::invalid_argument when label and prediction types do not
/// match the task or delta is negative.
bool is_correct(const Outcome& outcome);

std::string label_text(const Outcome& outcome);
std::string prediction_text(const Outcome& outcome);

struct CaseThresholds {
  double high_iou = 0.7;
  double low_iou = 0.1;
  double high_gtc = 0.7;
  double low_gtc = 0.3;
  double high_sc = 0.7;
  double low_sc = 0.3;

  void validate() const;

  friend bool operator==(const CaseThresholds&, const CaseThresholds&) = default;
};

/// "high_iou=0.8,low_sc=0.2" overrides the named fields of `base`.
CaseThresholds parse_thresholds(std::string_view text, CaseThresholds base = {});
std::string to_string(const CaseThresholds& thresholds);

enum class BehaviorCase {
  human_aligned,
  sufficient_subset,
  sufficient_context,
  context_dependent,
  confuser,
  insufficient_subset,
  distractor,
  context_confusion,
  uncategorized,
};

inline constexpr std::array<BehaviorCase, 9> kAllCases = {
    BehaviorCase::human_aligned,     BehaviorCase::sufficient_subset,
    BehaviorCase::sufficient_context, BehaviorCase::context_dependent,
    BehaviorCase::confuser,          BehaviorCase::insufficient_subset,
    BehaviorCase::distractor,        BehaviorCase::context_confusion,
    BehaviorCase::uncategorized,
};

std::string_view to_string(BehaviorCase c);
std::optional<BehaviorCase> parse_case(std::string_view name);

/// True for the four cases that only correct predictions can land in.
bool is_correct_branch(BehaviorCase c);

/// Assigns exactly one case. Predicates are tried in a fixed order:
/// IoU-high, subset pattern (high SC, low GTC), context pattern (high GTC,
/// low SC), IoU-low; anything else is uncategorized.
BehaviorCase classify_case(const CoverageScores& scores, bool correct, const CaseThresholds& t);

/// Every case whose predicate holds, ignoring precedence, in enum order.
std::vector<BehaviorCase> case_predicates(const CoverageScores& scores, bool correct,
                                          const CaseThresholds& t);

}  // namespace si
