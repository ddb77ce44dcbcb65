#include "shared_interest/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>
#include <unordered_set>

#include "json.hpp"
#include "shared_interest/error.hpp"
#include "shared_interest/tensor_io.hpp"

namespace si {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Modality modality) {
  return modality == Modality::image ? "image" : "text";
}

std::ostream& operator<<(std::ostream& os, const Diagnostic& d) {
  if (d.line > 0) os << "line " << d.line << ": ";
  if (!d.id.empty()) os << "[" << d.id << "] ";
  return os << d.message;
}

namespace {

[[noreturn]] void bad_record(const std::string& what) {
  throw Error(ErrorCode::malformed_manifest, what);
}

std::string required_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    bad_record(std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::variant<std::string, double> outcome_value(const json& j, const char* key, Task task) {
  auto it = j.find(key);
  if (it == j.end()) bad_record(std::string("missing field '") + key + "'");
  if (task == Task::classification) {
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    bad_record(std::string("field '") + key + "' must be a class name");
  }
  if (!it->is_number()) bad_record(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

struct Payload {
  std::optional<Tensor> tensor;  // set when the file is an SI-TENSOR
  fs::path path;
};

Payload open_payload(const fs::path& root, const std::string& ref, const char* role) {
  fs::path path = fs::path(ref).is_absolute() ? fs::path(ref) : root / ref;
  if (!fs::exists(path)) {
    throw Error(ErrorCode::not_found, std::string(role) + " not found: '" + ref + "'");
  }
  Payload p;
  p.path = path;
  if (looks_like_tensor(path)) p.tensor = read_tensor(path);
  return p;
}

FeatureSet mask_set(const Tensor& t, const fs::path& path) {
  if (t.dtype != DType::u8) {
    throw Error(ErrorCode::malformed_tensor, path.string() + ": expected a u8 mask, found f32");
  }
  try {
    return FeatureSet::from_mask(t.u8);
  } catch (const Error& e) {
    throw Error(ErrorCode::malformed_tensor, path.string() + ": " + e.what());
  }
}

void require_dims(const Dims& got, const Dims& want, const char* role) {
  if (got != want) {
    throw Error(ErrorCode::structural, std::string("dim mismatch: ") + role + " " +
                                           format_dims(got) + " vs record " + format_dims(want));
  }
}

Instance load_instance(InstanceRecord record, const fs::path& root) {
  Payload gt = open_payload(root, record.gt_ref, "gt_ref");
  Payload sal = open_payload(root, record.saliency_ref, "saliency_ref");

  if (gt.tensor && sal.tensor && gt.tensor->dims != sal.tensor->dims) {
    throw Error(ErrorCode::structural, "dim mismatch: mask " + format_dims(gt.tensor->dims) +
                                           " vs saliency " + format_dims(sal.tensor->dims));
  }

  Instance inst;
  const std::size_t n = element_count(record.dims);
  if (gt.tensor) {
    require_dims(gt.tensor->dims, record.dims, "mask");
    inst.ground_truth = mask_set(*gt.tensor, gt.path);
  } else {
    inst.ground_truth = read_index_list(gt.path, n);
  }
  if (inst.ground_truth.empty()) {
    throw Error(ErrorCode::invalid_annotation, "empty ground truth in '" + record.gt_ref + "'");
  }

  if (sal.tensor) {
    require_dims(sal.tensor->dims, record.dims, "saliency");
    if (sal.tensor->dtype == DType::f32) {
      try {
        inst.saliency = SaliencyField(sal.tensor->dims, std::move(sal.tensor->f32));
      } catch (const Error& e) {
        throw Error(ErrorCode::malformed_tensor, sal.path.string() + ": " + e.what());
      }
    } else {
      inst.saliency = mask_set(*sal.tensor, sal.path);
    }
  } else {
    inst.saliency = read_index_list(sal.path, n);
  }
  inst.record = std::move(record);
  return inst;
}

}  // namespace

InstanceRecord parse_manifest_record(const std::string& line, double default_delta) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    bad_record(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad_record("record must be a JSON object");

  auto version = j.find("si_manifest_version");
  if (version == j.end() || !version->is_number_integer()) {
    bad_record("missing si_manifest_version");
  }
  if (version->get<int>() != kManifestVersion) {
    bad_record("unsupported si_manifest_version " + version->dump());
  }

  InstanceRecord r;
  r.id = required_string(j, "id");
  if (r.id.empty()) bad_record("empty id");

  const std::string modality = j.value("modality", std::string("image"));
  if (modality == "image") r.modality = Modality::image;
  else if (modality == "text") r.modality = Modality::text;
  else bad_record("unknown modality '" + modality + "'");

  auto dims = j.find("dims");
  if (dims == j.end() || !dims->is_array() || dims->empty() || dims->size() > 3) {
    bad_record("dims must be an array of 1 to 3 axis lengths");
  }
  for (const auto& d : *dims) {
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) {
      bad_record("dims must be positive integers");
    }
    r.dims.push_back(d.get<std::size_t>());
  }

  const std::string task_name = j.value("task", std::string("classification"));
  auto task = parse_task(task_name);
  if (!task) bad_record("unknown task '" + task_name + "'");
  r.outcome.task = *task;
  r.outcome.label = outcome_value(j, "label", *task);
  r.outcome.prediction = outcome_value(j, "prediction", *task);
  r.outcome.delta = default_delta;
  if (auto it = j.find("delta"); it != j.end()) {
    if (!it->is_number() || it->get<double>() < 0.0) bad_record("delta must be a number >= 0");
    r.outcome.delta = it->get<double>();
  }

  r.gt_ref = required_string(j, "gt_ref");
  r.saliency_ref = required_string(j, "saliency_ref");
  if (auto it = j.find("image_ref"); it != j.end()) {
    if (!it->is_string()) bad_record("image_ref must be a string");
    r.image_ref = it->get<std::string>();
  }
  if (auto it = j.find("tokens"); it != j.end()) {
    if (!it->is_array()) bad_record("tokens must be an array of strings");
    for (const auto& t : *it) {
      if (!t.is_string()) bad_record("tokens must be an array of strings");
      r.tokens.push_back(t.get<std::string>());
    }
    if (r.tokens.size() != element_count(r.dims)) {
      bad_record("token count " + std::to_string(r.tokens.size()) + " does not match dims " +
                 format_dims(r.dims));
    }
  }
  return r;
}

LoadResult load_corpus(const fs::path& manifest_path, const fs::path& data_root,
                       const LoadOptions& options) {
  std::ifstream in(manifest_path);
  if (!fs::exists(manifest_path) || !in) {
    throw Error(ErrorCode::not_found, "manifest not found: '" + manifest_path.string() + "'");
  }

  LoadResult result;
  result.corpus.data_root = data_root;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::string id;
    try {
      InstanceRecord record = parse_manifest_record(line, options.default_delta);
      id = record.id;
      if (!seen.insert(record.id).second) {
        throw Error(ErrorCode::duplicate_id, "duplicate id '" + record.id + "'");
      }
      result.corpus.instances.push_back(load_instance(std::move(record), data_root));
    } catch (const Error& e) {
      if (options.strict) {
        throw Error(e.code(), manifest_path.string() + ":" + std::to_string(line_no) + ": " +
                                  e.what());
      }
      result.diagnostics.push_back({line_no, id, e.what()});
    }
  }
  return result;
}

ScoredInstance score_instance(const Instance& instance, const ThresholdRule& rule,
                              const CaseThresholds& thresholds) {
  ScoredInstance out;
  out.instance = &instance;
  out.rule = resolve_gt_size(rule, instance.ground_truth.size());
  if (const auto* field = std::get_if<SaliencyField>(&instance.saliency)) {
    out.saliency_set = discretize_score_based(*field, out.rule);
  } else {
    out.saliency_set = std::get<FeatureSet>(instance.saliency);
  }
  out.scores = compute_coverage(instance.ground_truth, out.saliency_set);
  out.correct = is_correct(instance.record.outcome);
  out.behavior = classify_case(out.scores, out.correct, thresholds);
  return out;
}

ScoreResult score_corpus(const Corpus& corpus, const ThresholdRule& rule,
                         const CaseThresholds& thresholds, unsigned threads) {
  rule.validate();
  thresholds.validate();

  const std::size_t n = corpus.size();
  std::vector<std::optional<ScoredInstance>> slots(n);
  std::vector<std::string> errors(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        slots[i] = score_instance(corpus.instances[i], rule, thresholds);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  ScoreResult result;
  result.scored.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]) {
      result.scored.push_back(std::move(*slots[i]));
    } else {
      result.diagnostics.push_back({0, corpus.instances[i].record.id, errors[i]});
    }
  }
  return result;
}

std::optional<SortKey> parse_sort_key(std::string_view name) {
  if (name == "manifest") return SortKey::manifest;
  if (name == "id") return SortKey::id;
  if (name == "iou") return SortKey::iou;
  if (name == "gtc") return SortKey::gtc;
  if (name == "sc") return SortKey::sc;
  return std::nullopt;
}

std::optional<SortDirection> parse_direction(std::string_view name) {
  if (name == "asc" || name == "ascending") return SortDirection::ascending;
  if (name == "desc" || name == "descending") return SortDirection::descending;
  return std::nullopt;
}

std::vector<const ScoredInstance*> filter_sort(const std::vector<ScoredInstance>& scored,
                                               const InstanceFilter& filter,
                                               const InstanceSort& sort) {
  if (filter.label || filter.prediction) {
    std::set<std::string> vocabulary;
    for (const auto& s : scored) {
      vocabulary.insert(label_text(s.record().outcome));
      vocabulary.insert(prediction_text(s.record().outcome));
    }
    if (filter.label && !vocabulary.contains(*filter.label)) {
      throw Error(ErrorCode::unknown_key, "unknown label '" + *filter.label + "'");
    }
    if (filter.prediction && !vocabulary.contains(*filter.prediction)) {
      throw Error(ErrorCode::unknown_key, "unknown prediction '" + *filter.prediction + "'");
    }
  }

  std::vector<const ScoredInstance*> out;
  for (const auto& s : scored) {
    if (filter.behavior && s.behavior != *filter.behavior) continue;
    if (filter.correct && s.correct != *filter.correct) continue;
    if (filter.label && label_text(s.record().outcome) != *filter.label) continue;
    if (filter.prediction && prediction_text(s.record().outcome) != *filter.prediction) continue;
    if (filter.range) {
      const double v = s.scores.value(filter.range->metric);
      if (v < filter.range->min || v > filter.range->max) continue;
    }
    out.push_back(&s);
  }

  if (sort.key == SortKey::manifest) {
    if (sort.direction == SortDirection::descending) std::reverse(out.begin(), out.end());
    return out;
  }
  const bool desc = sort.direction == SortDirection::descending;
  auto less = [&](const ScoredInstance* a, const ScoredInstance* b) {
    switch (sort.key) {
      case SortKey::id: return desc ? b->record().id < a->record().id : a->record().id < b->record().id;
      case SortKey::iou: return desc ? b->scores.iou < a->scores.iou : a->scores.iou < b->scores.iou;
      case SortKey::gtc: return desc ? b->scores.gtc < a->scores.gtc : a->scores.gtc < b->scores.gtc;
      case SortKey::sc: return desc ? b->scores.sc < a->scores.sc : a->scores.sc < b->scores.sc;
      case SortKey::manifest: break;
    }
    return false;
  };
  std::stable_sort(out.begin(), out.end(), less);
  return out;
}

std::size_t histogram_bin(double value) {
  // Scores are ratios of small integers; the slack keeps k/10 in bin k.
  const double scaled = std::floor(value * 10.0 + 1e-9);
  return static_cast<std::size_t>(std::clamp(scaled, 0.0, 9.0));
}

ScoreHistogram histogram(const std::vector<ScoredInstance>& scored, Metric metric) {
  if (scored.empty()) {
    throw Error(ErrorCode::invalid_argument, "histogram of an empty corpus");
  }
  ScoreHistogram h;
  h.metric = metric;
  for (std::size_t i = 0; i < h.bin_edges.size(); ++i) h.bin_edges[i] = static_cast<double>(i) / 10.0;
  for (const auto& s : scored) ++h.counts[histogram_bin(s.scores.value(metric))];
  return h;
}

CaseCounts case_summary(const std::vector<ScoredInstance>& scored) {
  CaseCounts counts{};
  for (const auto& s : scored) ++counts[static_cast<std::size_t>(s.behavior)];
  return counts;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "jsonl") return ReportFormat::jsonl;
  if (name == "csv") return ReportFormat::csv;
  return std::nullopt;
}

std::vector<std::string> instance_flags(const ScoredInstance& s) {
  std::vector<std::string> flags;
  if (s.empty_saliency()) flags.emplace_back("empty_saliency");
  if (std::holds_alternative<FeatureSet>(s.instance->saliency)) flags.emplace_back("prediscretized");
  return flags;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

void export_report(std::ostream& out, const std::vector<ScoredInstance>& scored,
                   ReportFormat format) {
  if (format == ReportFormat::csv) {
    out << kCsvHeader << '\n';
  }
  for (const auto& s : scored) {
    const auto& r = s.record();
    const auto flags = instance_flags(s);
    if (format == ReportFormat::csv) {
      std::string joined;
      for (const auto& f : flags) joined += (joined.empty() ? "" : ";") + f;
      out << csv_escape(r.id) << ',' << csv_escape(label_text(r.outcome)) << ','
          << csv_escape(prediction_text(r.outcome)) << ',' << (s.correct ? "true" : "false")
          << ',' << format_score(s.scores.iou) << ',' << format_score(s.scores.gtc) << ','
          << format_score(s.scores.sc) << ',' << to_string(s.behavior) << ',' << csv_escape(joined)
          << '\n';
    } else {
      // Written by hand so scores keep exactly six decimals.
      out << "{\"id\":" << json(r.id).dump() << ",\"label\":" << json(label_text(r.outcome)).dump()
          << ",\"prediction\":" << json(prediction_text(r.outcome)).dump()
          << ",\"correct\":" << (s.correct ? "true" : "false")
          << ",\"iou\":" << format_score(s.scores.iou) << ",\"gtc\":" << format_score(s.scores.gtc)
          << ",\"sc\":" << format_score(s.scores.sc) << ",\"case\":\"" << to_string(s.behavior)
          << "\",\"flags\":" << json(flags).dump() << "}\n";
    }
  }
}

void export_report(const fs::path& path, const std::vector<ScoredInstance>& scored,
                   ReportFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write report '" + path.string() + "'");
  export_report(out, scored, format);
  out.flush();
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

}  // namespace si
