#include "shared_interest/coverage.hpp"

#include "shared_interest/error.hpp"

namespace si {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::iou: return "iou";
    case Metric::gtc: return "gtc";
    case Metric::sc: return "sc";
  }
  return "iou";
}

std::optional<Metric> parse_metric(std::string_view name) {
  if (name == "iou") return Metric::iou;
  if (name == "gtc") return Metric::gtc;
  if (name == "sc") return Metric::sc;
  return std::nullopt;
}

double CoverageScores::value(Metric metric) const {
  switch (metric) {
    case Metric::iou: return iou;
    case Metric::gtc: return gtc;
    case Metric::sc: return sc;
  }
  return iou;
}

CoverageScores compute_coverage(const FeatureSet& g, const FeatureSet& s) {
  if (g.universe_size() != s.universe_size()) {
    throw Error(ErrorCode::structural, "universe mismatch between ground truth (" +
                                           std::to_string(g.universe_size()) + ") and saliency (" +
                                           std::to_string(s.universe_size()) + ")");
  }
  if (g.empty()) {
    throw Error(ErrorCode::invalid_annotation, "ground truth feature set is empty");
  }

  CoverageScores out;
  out.intersection_size = intersection_size(g, s);
  out.union_size = g.size() + s.size() - out.intersection_size;
  if (s.empty()) {
    out.empty_saliency = true;
    return out;
  }
  const auto inter = static_cast<double>(out.intersection_size);
  out.iou = inter / static_cast<double>(out.union_size);
  out.gtc = inter / static_cast<double>(g.size());
  out.sc = inter / static_cast<double>(s.size());
  return out;
}

}  // namespace si
