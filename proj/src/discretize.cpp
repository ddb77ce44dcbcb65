#include "shared_interest/discretize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <numeric>

#include "shared_interest/error.hpp"

namespace si {

namespace {

std::vector<double> working_values(const SaliencyField& field, bool take_absolute) {
  if (field.empty()) throw Error(ErrorCode::empty_field, "saliency field is empty");
  std::vector<double> v(field.values().begin(), field.values().end());
  if (take_absolute) {
    for (double& x : v) x = std::fabs(x);
  }
  return v;
}

// Indices ordered by descending value, lower index first on ties.
std::vector<FeatureIndex> ranked_indices(const std::vector<double>& v) {
  std::vector<FeatureIndex> order(v.size());
  std::iota(order.begin(), order.end(), FeatureIndex{0});
  std::sort(order.begin(), order.end(), [&](FeatureIndex a, FeatureIndex b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return a < b;
  });
  return order;
}

FeatureSet top_m(const std::vector<double>& v, std::size_t m) {
  auto order = ranked_indices(v);
  order.resize(std::min(m, order.size()));
  return FeatureSet::from_unsorted(v.size(), std::move(order));
}

bool is_count(double x) { return x >= 1.0 && std::floor(x) == x; }

std::string format_number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

ThresholdRule ThresholdRule::mean_plus_sigma(double k, bool take_absolute) {
  return {RuleKind::mean_plus_sigma, k, take_absolute};
}
ThresholdRule ThresholdRule::top_fraction(double p, bool take_absolute) {
  return {RuleKind::top_fraction, p, take_absolute};
}
ThresholdRule ThresholdRule::top_n(std::size_t n, bool take_absolute) {
  return {RuleKind::top_n, static_cast<double>(n), take_absolute};
}
ThresholdRule ThresholdRule::gt_size(bool take_absolute) {
  return {RuleKind::gt_size, 0.0, take_absolute};
}
ThresholdRule ThresholdRule::positive_top_n(std::size_t n) {
  return {RuleKind::positive_top_n, static_cast<double>(n), false};
}

void ThresholdRule::validate() const {
  auto bad = [&](const char* what) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " (got " +
                                                 format_number(parameter) + ")");
  };
  switch (kind) {
    case RuleKind::mean_plus_sigma:
      if (!std::isfinite(parameter) || parameter < 0.0) bad("mean_plus_sigma needs k >= 0");
      break;
    case RuleKind::top_fraction:
      if (!(parameter > 0.0 && parameter <= 1.0)) bad("top_fraction needs p in (0, 1]");
      break;
    case RuleKind::top_n:
      if (!is_count(parameter)) bad("top_n needs an integer n >= 1");
      break;
    case RuleKind::positive_top_n:
      if (!is_count(parameter)) bad("positive_top_n needs an integer n >= 1");
      break;
    case RuleKind::gt_size:
      break;
  }
}

ThresholdRule parse_rule(std::string_view text, bool take_absolute) {
  constexpr std::string_view abs_suffix = ",abs";
  if (text.size() >= abs_suffix.size() && text.substr(text.size() - abs_suffix.size()) == abs_suffix) {
    take_absolute = true;
    text.remove_suffix(abs_suffix.size());
  }
  const auto eq = text.find('=');
  const std::string_view name = text.substr(0, eq);
  double value = 0.0;
  const bool has_value = eq != std::string_view::npos;
  if (has_value) {
    const std::string_view arg = text.substr(eq + 1);
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
    if (ec != std::errc() || ptr != arg.data() + arg.size() || arg.empty()) {
      throw Error(ErrorCode::invalid_argument, "bad rule parameter '" + std::string(arg) + "'");
    }
  }

  ThresholdRule rule;
  rule.take_absolute = take_absolute;
  rule.parameter = value;
  if (name == "mean_plus_sigma") {
    rule.kind = RuleKind::mean_plus_sigma;
  } else if (name == "mean") {
    rule.kind = RuleKind::mean_plus_sigma;
    if (has_value) throw Error(ErrorCode::invalid_argument, "rule 'mean' takes no parameter");
    rule.parameter = 0.0;
  } else if (name == "top_fraction") {
    rule.kind = RuleKind::top_fraction;
  } else if (name == "top_n") {
    rule.kind = RuleKind::top_n;
  } else if (name == "positive_top_n") {
    rule.kind = RuleKind::positive_top_n;
  } else if (name == "gt_size") {
    if (has_value) throw Error(ErrorCode::invalid_argument, "rule 'gt_size' takes no parameter");
    rule.kind = RuleKind::gt_size;
  } else {
    throw Error(ErrorCode::unknown_key, "unknown threshold rule '" + std::string(name) + "'");
  }
  if (!has_value && rule.kind != RuleKind::gt_size && name != "mean") {
    throw Error(ErrorCode::invalid_argument, "rule '" + std::string(name) + "' needs a parameter");
  }
  rule.validate();
  return rule;
}

std::string to_string(const ThresholdRule& rule) {
  std::string out;
  switch (rule.kind) {
    case RuleKind::mean_plus_sigma: out = "mean_plus_sigma=" + format_number(rule.parameter); break;
    case RuleKind::top_fraction: out = "top_fraction=" + format_number(rule.parameter); break;
    case RuleKind::top_n: out = "top_n=" + format_number(rule.parameter); break;
    case RuleKind::positive_top_n: out = "positive_top_n=" + format_number(rule.parameter); break;
    case RuleKind::gt_size: out = "gt_size"; break;
  }
  if (rule.take_absolute) out += ",abs";
  return out;
}

ThresholdRule resolve_gt_size(const ThresholdRule& rule, std::size_t ground_truth_size) {
  if (rule.kind != RuleKind::gt_size) return rule;
  return ThresholdRule::top_n(ground_truth_size, rule.take_absolute);
}

FieldStats population_stats(const SaliencyField& field, bool take_absolute) {
  const auto v = working_values(field, take_absolute);
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) return {*lo, 0.0};

  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

FeatureSet discretize_score_based(const SaliencyField& field, const ThresholdRule& rule) {
  rule.validate();
  const auto v = working_values(field, rule.take_absolute);
  const std::size_t n = v.size();

  switch (rule.kind) {
    case RuleKind::mean_plus_sigma: {
      const FieldStats stats = population_stats(field, rule.take_absolute);
      const double cutoff = stats.mean + rule.parameter * stats.sigma;
      std::vector<FeatureIndex> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (v[i] > cutoff) members.push_back(static_cast<FeatureIndex>(i));
      }
      return FeatureSet(n, std::move(members));
    }
    case RuleKind::top_fraction: {
      // The epsilon keeps p * N that is integral in exact arithmetic from
      // rounding up (0.07 * 100 is 7.000000000000001 in binary).
      const double raw = rule.parameter * static_cast<double>(n);
      const auto m = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
      return top_m(v, std::max<std::size_t>(m, 1));
    }
    case RuleKind::top_n:
      return top_m(v, static_cast<std::size_t>(rule.parameter));
    case RuleKind::positive_top_n: {
      auto order = ranked_indices(v);
      std::vector<FeatureIndex> members;
      const auto limit = static_cast<std::size_t>(rule.parameter);
      for (FeatureIndex i : order) {
        if (members.size() == limit || !(v[i] > 0.0)) break;
        members.push_back(i);
      }
      return FeatureSet::from_unsorted(n, std::move(members));
    }
    case RuleKind::gt_size:
      throw Error(ErrorCode::invalid_argument,
                  "gt_size must be resolved to top_n with the ground-truth cardinality");
  }
  return FeatureSet(n);
}

ModelBasedResult discretize_model_based(const SaliencyField& field, ConfidenceOracle& oracle,
                                        double confidence_threshold) {
  if (!(confidence_threshold > 0.0 && confidence_threshold <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "confidence threshold must be in (0, 1]");
  }
  const auto v = working_values(field, false);
  const std::size_t n = v.size();

  ModelBasedResult result;
  std::vector<FeatureIndex> chosen;
  for (FeatureIndex i : ranked_indices(v)) {
    if (!(v[i] > 0.0)) break;
    chosen.push_back(i);
    FeatureSet candidate = FeatureSet::from_unsorted(n, chosen);
    double confidence = 0.0;
    try {
      confidence = oracle.confidence(candidate);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::oracle, std::string("confidence oracle failed: ") + e.what());
    }
    ++result.queries;
    if (!std::isfinite(confidence)) {
      throw Error(ErrorCode::oracle, "confidence oracle returned a non-finite value");
    }
    if (confidence >= confidence_threshold) {
      result.features = std::move(candidate);
      result.converged = true;
      return result;
    }
  }
  result.features = FeatureSet::from_unsorted(n, std::move(chosen));
  return result;
}

}  // namespace si
