#include "shared_interest/taxonomy.hpp"

#include <charconv>
#include <cmath>

#include "shared_interest/error.hpp"

namespace si {

namespace {

// Absorbs representation error in differences of decimal grid values
// (0.65 - 0.6 is 0.05000000000000004) without admitting real overshoot.
constexpr double kRegressionSlack = 1e-12;

std::string number_text(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string value_text(const std::variant<std::string, double>& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return number_text(std::get<double>(v));
}

}  // namespace

std::string_view to_string(Task task) {
  return task == Task::classification ? "classification" : "regression";
}

std::optional<Task> parse_task(std::string_view name) {
  if (name == "classification") return Task::classification;
  if (name == "regression") return Task::regression;
  return std::nullopt;
}

Outcome Outcome::classification(std::string label, std::string prediction) {
  return {Task::classification, std::move(label), std::move(prediction), kDefaultRegressionDelta};
}

Outcome Outcome::regression(double label, double prediction, double delta) {
  return {Task::regression, label, prediction, delta};
}

bool is_correct(const Outcome& outcome) {
  if (outcome.task == Task::classification) {
    const auto* label = std::get_if<std::string>(&outcome.label);
    const auto* pred = std::get_if<std::string>(&outcome.prediction);
    if (!label || !pred) {
      throw Error(ErrorCode::invalid_argument, "classification outcomes need class names");
    }
    return *label == *pred;
  }
  const auto* label = std::get_if<double>(&outcome.label);
  const auto* pred = std::get_if<double>(&outcome.prediction);
  if (!label || !pred) {
    throw Error(ErrorCode::invalid_argument, "regression outcomes need numeric values");
  }
  if (!(outcome.delta >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "regression delta must be >= 0");
  }
  return std::fabs(*pred - *label) <= outcome.delta + kRegressionSlack;
}

std::string label_text(const Outcome& outcome) { return value_text(outcome.label); }
std::string prediction_text(const Outcome& outcome) { return value_text(outcome.prediction); }

void CaseThresholds::validate() const {
  const double all[] = {high_iou, low_iou, high_gtc, low_gtc, high_sc, low_sc};
  for (double x : all) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "case thresholds must lie in [0, 1]");
    }
  }
  if (low_iou > high_iou || low_gtc > high_gtc || low_sc > high_sc) {
    throw Error(ErrorCode::invalid_argument, "low case thresholds must not exceed high ones");
  }
}

CaseThresholds parse_thresholds(std::string_view text, CaseThresholds base) {
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;

    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::invalid_argument, "threshold '" + std::string(item) + "' needs a value");
    }
    const std::string_view key = item.substr(0, eq);
    const std::string_view arg = item.substr(eq + 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
    if (ec != std::errc() || ptr != arg.data() + arg.size() || arg.empty()) {
      throw Error(ErrorCode::invalid_argument, "bad threshold value '" + std::string(arg) + "'");
    }
    if (key == "high_iou") base.high_iou = value;
    else if (key == "low_iou") base.low_iou = value;
    else if (key == "high_gtc") base.high_gtc = value;
    else if (key == "low_gtc") base.low_gtc = value;
    else if (key == "high_sc") base.high_sc = value;
    else if (key == "low_sc") base.low_sc = value;
    else throw Error(ErrorCode::unknown_key, "unknown threshold '" + std::string(key) + "'");
  }
  base.validate();
  return base;
}

std::string to_string(const CaseThresholds& t) {
  return "high_iou=" + number_text(t.high_iou) + ",low_iou=" + number_text(t.low_iou) +
         ",high_gtc=" + number_text(t.high_gtc) + ",low_gtc=" + number_text(t.low_gtc) +
         ",high_sc=" + number_text(t.high_sc) + ",low_sc=" + number_text(t.low_sc);
}

std::string_view to_string(BehaviorCase c) {
  switch (c) {
    case BehaviorCase::human_aligned: return "human_aligned";
    case BehaviorCase::sufficient_subset: return "sufficient_subset";
    case BehaviorCase::sufficient_context: return "sufficient_context";
    case BehaviorCase::context_dependent: return "context_dependent";
    case BehaviorCase::confuser: return "confuser";
    case BehaviorCase::insufficient_subset: return "insufficient_subset";
    case BehaviorCase::distractor: return "distractor";
    case BehaviorCase::context_confusion: return "context_confusion";
    case BehaviorCase::uncategorized: return "uncategorized";
  }
  return "uncategorized";
}

std::optional<BehaviorCase> parse_case(std::string_view name) {
  for (BehaviorCase c : kAllCases) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

bool is_correct_branch(BehaviorCase c) {
  return c == BehaviorCase::human_aligned || c == BehaviorCase::sufficient_subset ||
         c == BehaviorCase::sufficient_context || c == BehaviorCase::context_dependent;
}

namespace {

struct Pattern {
  bool high_iou;
  bool subset;   // high SC, low GTC
  bool context;  // high GTC, low SC
  bool low_iou;
};

Pattern match(const CoverageScores& s, const CaseThresholds& t) {
  return {s.iou >= t.high_iou, s.sc >= t.high_sc && s.gtc <= t.low_gtc,
          s.gtc >= t.high_gtc && s.sc <= t.low_sc, s.iou <= t.low_iou};
}

}  // namespace

BehaviorCase classify_case(const CoverageScores& scores, bool correct, const CaseThresholds& t) {
  const Pattern p = match(scores, t);
  if (correct) {
    if (p.high_iou) return BehaviorCase::human_aligned;
    if (p.subset) return BehaviorCase::sufficient_subset;
    if (p.context) return BehaviorCase::context_dependent;
    if (p.low_iou) return BehaviorCase::sufficient_context;
  } else {
    if (p.high_iou) return BehaviorCase::confuser;
    if (p.subset) return BehaviorCase::insufficient_subset;
    if (p.context) return BehaviorCase::context_confusion;
    if (p.low_iou) return BehaviorCase::distractor;
  }
  return BehaviorCase::uncategorized;
}

std::vector<BehaviorCase> case_predicates(const CoverageScores& scores, bool correct,
                                          const CaseThresholds& t) {
  const Pattern p = match(scores, t);
  std::vector<BehaviorCase> out;
  if (correct) {
    if (p.high_iou) out.push_back(BehaviorCase::human_aligned);
    if (p.subset) out.push_back(BehaviorCase::sufficient_subset);
    if (p.low_iou) out.push_back(BehaviorCase::sufficient_context);
    if (p.context) out.push_back(BehaviorCase::context_dependent);
  } else {
    if (p.high_iou) out.push_back(BehaviorCase::confuser);
    if (p.subset) out.push_back(BehaviorCase::insufficient_subset);
    if (p.low_iou) out.push_back(BehaviorCase::distractor);
    if (p.context) out.push_back(BehaviorCase::context_confusion);
  }
  return out;
}

}  // namespace si
