#include "shared_interest/probe.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>

#include "json.hpp"
#include "shared_interest/error.hpp"
#include "shared_interest/tensor_io.hpp"

namespace si {

namespace fs = std::filesystem;

SaliencyStack::SaliencyStack(std::string image_id, std::vector<std::string> class_names,
                             std::vector<SaliencyField> fields, ThresholdRule rule)
    : image_id_(std::move(image_id)),
      class_names_(std::move(class_names)),
      fields_(std::move(fields)),
      rule_(rule) {
  if (fields_.empty()) throw Error(ErrorCode::structural, "saliency stack has no classes");
  if (class_names_.size() != fields_.size()) {
    throw Error(ErrorCode::structural, "class count mismatch: " +
                                           std::to_string(class_names_.size()) + " names vs " +
                                           std::to_string(fields_.size()) + " fields");
  }
  std::set<std::string> unique(class_names_.begin(), class_names_.end());
  if (unique.size() != class_names_.size()) {
    throw Error(ErrorCode::duplicate_id, "class names in stack '" + image_id_ + "' are not unique");
  }
  for (const auto& f : fields_) {
    if (f.dims() != fields_.front().dims()) {
      throw Error(ErrorCode::structural, "dim mismatch in stack: " + format_dims(f.dims()) +
                                             " vs " + format_dims(fields_.front().dims()));
    }
  }
  rule_.validate();
}

std::shared_ptr<const std::vector<FeatureSet>> SaliencyStack::discretized(
    const ThresholdRule& rule) const {
  const std::string key = to_string(rule);
  {
    std::shared_lock lock(cache_->mutex);
    if (auto it = cache_->by_rule.find(key); it != cache_->by_rule.end()) return it->second;
  }
  auto sets = std::make_shared<std::vector<FeatureSet>>();
  sets->reserve(fields_.size());
  for (const auto& field : fields_) sets->push_back(discretize_score_based(field, rule));

  std::unique_lock lock(cache_->mutex);
  auto [it, inserted] = cache_->by_rule.emplace(key, std::move(sets));
  return it->second;
}

ProbeResult probe(const SaliencyStack& stack, const ProbeQuery& query) {
  return probe(stack, query, stack.rule());
}

ProbeResult probe(const SaliencyStack& stack, const ProbeQuery& query, const ThresholdRule& rule) {
  if (query.image_id != stack.image_id()) {
    throw Error(ErrorCode::not_found, "unknown image '" + query.image_id + "'");
  }
  if (query.k == 0) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
  if (query.annotation.universe_size() != element_count(stack.dims())) {
    throw Error(ErrorCode::structural,
                "dim mismatch: annotation universe " +
                    std::to_string(query.annotation.universe_size()) + " vs stack " +
                    format_dims(stack.dims()));
  }
  if (query.annotation.empty()) {
    throw Error(ErrorCode::invalid_annotation, "annotation is empty");
  }

  const auto sets = stack.discretized(resolve_gt_size(rule, query.annotation.size()));
  std::vector<ProbeEntry> entries;
  entries.reserve(sets->size());
  for (std::size_t c = 0; c < sets->size(); ++c) {
    const CoverageScores scores = compute_coverage(query.annotation, (*sets)[c]);
    entries.push_back({c, stack.class_names()[c], scores.value(query.metric), (*sets)[c]});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const ProbeEntry& a, const ProbeEntry& b) { return a.score > b.score; });
  entries.resize(std::min(query.k, entries.size()));

  ProbeResult result;
  result.image_id = stack.image_id();
  result.metric = query.metric;
  result.ranking = std::move(entries);
  return result;
}

namespace {

SaliencyField field_from(Tensor t, const fs::path& path) {
  if (t.dtype != DType::f32) {
    throw Error(ErrorCode::malformed_tensor, path.string() + ": stack payloads must be f32");
  }
  return SaliencyField(std::move(t.dims), std::move(t.f32));
}

}  // namespace

namespace {

SaliencyStack load_stack_impl(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::not_found, "stack manifest not found: '" + manifest_path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::malformed_manifest, manifest_path.string() + ": " + e.what());
  }
  const auto bad = [&](const std::string& what) {
    return Error(ErrorCode::malformed_manifest, manifest_path.string() + ": " + what);
  };
  if (!j.is_object()) throw bad("stack manifest must be a JSON object");
  if (!j.contains("image_id") || !j["image_id"].is_string()) throw bad("missing image_id");
  if (!j.contains("class_names") || !j["class_names"].is_array()) throw bad("missing class_names");

  std::vector<std::string> names;
  for (const auto& n : j["class_names"]) {
    if (!n.is_string()) throw bad("class_names must be strings");
    names.push_back(n.get<std::string>());
  }

  ThresholdRule rule = SaliencyStack::default_rule();
  if (j.contains("rule")) {
    if (!j["rule"].is_string()) throw bad("rule must be a string");
    rule = parse_rule(j["rule"].get<std::string>(), j.value("abs", true));
  } else if (j.contains("abs")) {
    rule.take_absolute = j["abs"].get<bool>();
  }

  const fs::path base = manifest_path.parent_path();
  auto resolve = [&](const std::string& ref) {
    fs::path p(ref);
    return p.is_absolute() ? p : base / p;
  };

  std::vector<SaliencyField> fields;
  const bool packed = j.contains("packed");
  const bool files = j.contains("files");
  if (packed == files) throw bad("exactly one of 'packed' or 'files' is required");
  if (packed) {
    const fs::path path = resolve(j["packed"].get<std::string>());
    Tensor t = read_tensor(path);
    if (t.dims.size() < 2) {
      throw Error(ErrorCode::malformed_tensor, path.string() + ": packed stack needs a class axis");
    }
    if (t.dtype != DType::f32) {
      throw Error(ErrorCode::malformed_tensor, path.string() + ": stack payloads must be f32");
    }
    const std::size_t classes = t.dims.front();
    if (classes != names.size()) {
      throw Error(ErrorCode::structural, "class count mismatch: " + std::to_string(names.size()) +
                                             " names vs " + std::to_string(classes) + " fields");
    }
    Dims per_class(t.dims.begin() + 1, t.dims.end());
    const std::size_t n = element_count(per_class);
    for (std::size_t c = 0; c < classes; ++c) {
      std::vector<float> values(t.f32.begin() + static_cast<std::ptrdiff_t>(c * n),
                                t.f32.begin() + static_cast<std::ptrdiff_t>((c + 1) * n));
      fields.emplace_back(per_class, std::move(values));
    }
  } else {
    if (!j["files"].is_array()) throw bad("'files' must be an array");
    if (j["files"].size() != names.size()) {
      throw Error(ErrorCode::structural, "class count mismatch: " + std::to_string(names.size()) +
                                             " names vs " + std::to_string(j["files"].size()) +
                                             " fields");
    }
    for (const auto& f : j["files"]) {
      const fs::path path = resolve(f.get<std::string>());
      fields.push_back(field_from(read_tensor(path), path));
    }
  }
  return SaliencyStack(j["image_id"].get<std::string>(), std::move(names), std::move(fields), rule);
}

}  // namespace

SaliencyStack load_stack(const fs::path& manifest_path) {
  try {
    return load_stack_impl(manifest_path);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed_manifest, manifest_path.string() + ": " + e.what());
  }
}

}  // namespace si
