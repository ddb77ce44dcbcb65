#include "shared_interest/service.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <set>

#include "httplib.h"
#include "shared_interest/error.hpp"
#include "shared_interest/run_length.hpp"

namespace si {

using nlohmann::json;

namespace {

int status_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->code()) {
      case ErrorCode::not_found: return 404;
      case ErrorCode::io:
      case ErrorCode::oracle: return 500;
      default: return 400;
    }
  }
  if (dynamic_cast<const json::exception*>(&e)) return 400;
  return 500;
}

ApiResponse ok(const json& body) { return {200, body.dump(), "application/json"}; }

ApiResponse failure(const std::exception& e) {
  return {status_for(e), error_json(e).dump(), "application/json"};
}

template <typename F>
ApiResponse guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return failure(e);
  }
}

json runs_json(const FeatureSet& set) {
  json out = json::array();
  for (const auto& [start, length] : encode_runs(set)) out.push_back({start, length});
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::invalid_argument, "parameter '" + key + "' must be a non-negative integer");
  }
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::invalid_argument, "parameter '" + key + "' must be a number");
  }
  return value;
}

json histogram_json(const std::vector<ScoredInstance>& scored, Metric metric) {
  std::array<std::size_t, 10> counts{};
  for (const auto& s : scored) ++counts[histogram_bin(s.scores.value(metric))];
  json edges = json::array();
  for (int i = 0; i <= 10; ++i) edges.push_back(static_cast<double>(i) / 10.0);
  return {{"bin_edges", edges}, {"counts", counts}};
}

std::string content_type_for(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  return "application/octet-stream";
}

}  // namespace

json error_json(const std::exception& e) {
  json out = {{"error", e.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) out["code"] = to_string(err->code());
  return out;
}

InstanceQuery parse_instance_query(const QueryParams& params) {
  static const std::set<std::string> known = {"case", "label", "prediction", "correct", "metric",
                                              "min",  "max",   "sort",       "dir",     "offset",
                                              "limit"};
  InstanceQuery q;
  std::optional<Metric> range_metric;
  std::optional<double> min, max;
  for (auto it = params.begin(); it != params.end(); it = params.upper_bound(it->first)) {
    const std::string& key = it->first;
    if (!known.contains(key)) throw Error(ErrorCode::unknown_key, "unknown parameter '" + key + "'");
    if (params.count(key) > 1) {
      throw Error(ErrorCode::invalid_argument, "parameter '" + key + "' given more than once");
    }
    const std::string& value = it->second;
    if (key == "case") {
      auto c = parse_case(value);
      if (!c) throw Error(ErrorCode::unknown_key, "unknown case '" + value + "'");
      q.filter.behavior = c;
    } else if (key == "label") {
      q.filter.label = value;
    } else if (key == "prediction") {
      q.filter.prediction = value;
    } else if (key == "correct") {
      if (value == "true" || value == "1") q.filter.correct = true;
      else if (value == "false" || value == "0") q.filter.correct = false;
      else throw Error(ErrorCode::invalid_argument, "parameter 'correct' must be true or false");
    } else if (key == "metric") {
      range_metric = parse_metric(value);
      if (!range_metric) throw Error(ErrorCode::unknown_key, "unknown metric '" + value + "'");
    } else if (key == "min") {
      min = parse_real(key, value);
    } else if (key == "max") {
      max = parse_real(key, value);
    } else if (key == "sort") {
      auto k = parse_sort_key(value);
      if (!k) throw Error(ErrorCode::unknown_key, "unknown sort key '" + value + "'");
      q.sort.key = *k;
    } else if (key == "dir") {
      auto d = parse_direction(value);
      if (!d) throw Error(ErrorCode::unknown_key, "unknown sort direction '" + value + "'");
      q.sort.direction = *d;
    } else if (key == "offset") {
      q.offset = parse_count(key, value);
    } else if (key == "limit") {
      q.limit = parse_count(key, value);
    }
  }
  if (min || max) {
    if (!range_metric) throw Error(ErrorCode::invalid_argument, "min/max need a metric");
    q.filter.range = MetricRange{*range_metric, min.value_or(0.0), max.value_or(1.0)};
    if (q.filter.range->min > q.filter.range->max) {
      throw Error(ErrorCode::invalid_argument, "min must not exceed max");
    }
  }
  // A metric without an explicit sort key also orders the page.
  if (range_metric && !params.contains("sort")) {
    q.sort.key = *range_metric == Metric::iou ? SortKey::iou : *range_metric == Metric::gtc ? SortKey::gtc : SortKey::sc;
  }
  return q;
}

json instance_json(const ScoredInstance& s, bool with_sets) {
  const auto& r = s.record();
  json out = {
      {"id", r.id},
      {"modality", to_string(r.modality)},
      {"dims", r.dims},
      {"task", to_string(r.outcome.task)},
      {"label", label_text(r.outcome)},
      {"prediction", prediction_text(r.outcome)},
      {"correct", s.correct},
      {"iou", s.scores.iou},
      {"gtc", s.scores.gtc},
      {"sc", s.scores.sc},
      {"intersection_size", s.scores.intersection_size},
      {"union_size", s.scores.union_size},
      {"case", to_string(s.behavior)},
      {"flags", instance_flags(s)},
      {"rule", to_string(s.rule)},
      {"has_image", r.image_ref.has_value()},
  };
  if (!r.tokens.empty()) out["tokens"] = r.tokens;
  if (with_sets) {
    out["ground_truth"] = runs_json(s.instance->ground_truth);
    out["saliency"] = runs_json(s.saliency_set);
  }
  return out;
}

json config_json(const AppConfig& c) {
  json stacks = json::array();
  for (const auto& p : c.stack_paths) stacks.push_back(p.string());
  return {
      {"data_root", c.data_root.string()},
      {"manifest", c.manifest_path.string()},
      {"rule", to_string(c.rule)},
      {"abs", c.rule.take_absolute},
      {"thresholds",
       {{"high_iou", c.thresholds.high_iou},
        {"low_iou", c.thresholds.low_iou},
        {"high_gtc", c.thresholds.high_gtc},
        {"low_gtc", c.thresholds.low_gtc},
        {"high_sc", c.thresholds.high_sc},
        {"low_sc", c.thresholds.low_sc}}},
      {"delta", c.delta},
      {"host", c.host},
      {"port", c.port},
      {"stacks", stacks},
  };
}

json summary_json(const std::vector<ScoredInstance>& scored) {
  const CaseCounts counts = case_summary(scored);
  json cases = json::object();
  for (BehaviorCase c : kAllCases) cases[std::string(to_string(c))] = counts[static_cast<std::size_t>(c)];
  return {
      {"instances", scored.size()},
      {"cases", cases},
      {"histograms",
       {{"iou", histogram_json(scored, Metric::iou)},
        {"gtc", histogram_json(scored, Metric::gtc)},
        {"sc", histogram_json(scored, Metric::sc)}}},
  };
}

Service::Service(AppConfig config, Corpus corpus, std::vector<SaliencyStack> stacks)
    : config_(std::move(config)), corpus_(std::move(corpus)), stacks_(std::move(stacks)) {
  ScoreResult result = score_corpus(corpus_, config_.rule, config_.thresholds, config_.threads);
  scored_ = std::move(result.scored);
  diagnostics_ = std::move(result.diagnostics);
  std::set<std::string> ids;
  for (const auto& s : stacks_) {
    if (!ids.insert(s.image_id()).second) {
      throw Error(ErrorCode::duplicate_id, "two stacks share image id '" + s.image_id() + "'");
    }
  }
}

ApiResponse Service::health() const {
  return ok({{"status", "ok"}, {"instances", scored_.size()}, {"stacks", stacks_.size()}});
}

ApiResponse Service::instances(const QueryParams& params) const {
  return guarded([&] {
    const InstanceQuery q = parse_instance_query(params);
    const auto matches = filter_sort(scored_, q.filter, q.sort);
    json items = json::array();
    const std::size_t begin = std::min(q.offset, matches.size());
    const std::size_t end = begin + std::min(q.limit, matches.size() - begin);
    for (std::size_t i = begin; i < end; ++i) items.push_back(instance_json(*matches[i], true));
    return ok({{"total", matches.size()}, {"offset", q.offset}, {"limit", q.limit}, {"items", items}});
  });
}

ApiResponse Service::instance(const std::string& id) const {
  for (const auto& s : scored_) {
    if (s.record().id == id) return ok(instance_json(s, true));
  }
  return failure(Error(ErrorCode::not_found, "unknown instance '" + id + "'"));
}

ApiResponse Service::image(const std::string& id) const {
  return guarded([&]() -> ApiResponse {
    for (const auto& s : scored_) {
      if (s.record().id != id) continue;
      if (!s.record().image_ref) break;
      std::filesystem::path path(*s.record().image_ref);
      if (path.is_relative()) path = corpus_.data_root / path;
      std::ifstream in(path, std::ios::binary);
      if (!in) throw Error(ErrorCode::not_found, "image file missing for '" + id + "'");
      std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      return {200, std::move(bytes), content_type_for(path)};
    }
    throw Error(ErrorCode::not_found, "no image for instance '" + id + "'");
  });
}

ApiResponse Service::summary() const { return ok(summary_json(scored_)); }

ApiResponse Service::stacks() const {
  json list = json::array();
  for (const auto& s : stacks_) {
    list.push_back({{"image_id", s.image_id()},
                    {"classes", s.class_count()},
                    {"class_names", s.class_names()},
                    {"dims", s.dims()},
                    {"rule", to_string(s.rule())}});
  }
  return ok({{"stacks", list}});
}

ApiResponse Service::probe(const std::string& body) const {
  return guarded([&] {
    const json req = json::parse(body);
    if (!req.is_object()) throw Error(ErrorCode::invalid_argument, "probe body must be an object");
    const std::string image_id = req.at("image_id").get<std::string>();
    const SaliencyStack* stack = nullptr;
    for (const auto& s : stacks_) {
      if (s.image_id() == image_id) stack = &s;
    }
    if (!stack) throw Error(ErrorCode::not_found, "unknown image '" + image_id + "'");

    ProbeQuery q;
    q.image_id = image_id;
    std::vector<Run> runs;
    for (const auto& run : req.at("annotation")) {
      if (!run.is_array() || run.size() != 2) {
        throw Error(ErrorCode::invalid_argument, "annotation runs must be [start, length] pairs");
      }
      runs.emplace_back(run[0].get<FeatureIndex>(), run[1].get<std::size_t>());
    }
    q.annotation = decode_runs(runs, element_count(stack->dims()));
    if (req.contains("metric")) {
      auto m = parse_metric(req["metric"].get<std::string>());
      if (!m) throw Error(ErrorCode::unknown_key, "unknown metric");
      q.metric = *m;
    }
    if (req.contains("k")) {
      const auto k = req["k"].get<long long>();
      if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
      q.k = static_cast<std::size_t>(k);
    }
    ThresholdRule rule = stack->rule();
    if (req.contains("rule")) {
      rule = parse_rule(req["rule"].get<std::string>(), req.value("abs", rule.take_absolute));
    }

    const ProbeResult result = si::probe(*stack, q, rule);
    json results = json::array();
    for (std::size_t i = 0; i < result.ranking.size(); ++i) {
      const auto& e = result.ranking[i];
      results.push_back({{"rank", i + 1},
                         {"class", e.class_name},
                         {"class_index", e.class_index},
                         {"score", e.score},
                         {"saliency", runs_json(e.saliency_set)}});
    }
    return ok({{"image_id", result.image_id},
               {"metric", to_string(result.metric)},
               {"rule", to_string(rule)},
               {"results", results}});
  });
}

ApiResponse Service::config() const { return ok(config_json(config_)); }

void Service::bind(httplib::Server& server) const {
  auto send = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get("/api/health", [=, this](const httplib::Request&, httplib::Response& res) {
    send(res, health());
  });
  server.Get("/api/instances", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, instances(req.params));
  });
  server.Get(R"(/api/instances/([^/]+))",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               send(res, instance(req.matches[1]));
             });
  server.Get(R"(/api/images/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, image(req.matches[1]));
  });
  server.Get("/api/summary", [=, this](const httplib::Request&, httplib::Response& res) {
    send(res, summary());
  });
  server.Get("/api/stacks", [=, this](const httplib::Request&, httplib::Response& res) {
    send(res, stacks());
  });
  server.Post("/api/probe", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, probe(req.body));
  });
  server.Get("/api/config", [=, this](const httplib::Request&, httplib::Response& res) {
    send(res, config());
  });
}

}  // namespace si
