#include "shared_interest/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "shared_interest/config.hpp"
#include "shared_interest/corpus.hpp"
#include "shared_interest/error.hpp"
#include "shared_interest/probe.hpp"
#include "shared_interest/service.hpp"
#include "shared_interest/tensor_io.hpp"

namespace si {

namespace fs = std::filesystem;

namespace {

struct CliOptions {
  std::string manifest;
  std::string data_root;
  std::string rule = "mean_plus_sigma=1";
  bool abs = false;
  double delta = kDefaultRegressionDelta;
  std::string thresholds;
  std::string metric = "iou";
  long long k = 5;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string format = "csv";
  std::string out = ".";
  bool strict = false;
  unsigned threads = 1;
  std::vector<std::string> stacks;
  std::string image;
  std::string annotation;
};

// Raised for problems the caller can fix by changing flags or config.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

AppConfig make_config(const CliOptions& o) {
  AppConfig c;
  c.manifest_path = o.manifest;
  // Payload paths default to the manifest's directory.
  c.data_root = o.data_root.empty() ? fs::path(o.manifest).parent_path() : fs::path(o.data_root);
  try {
    c.rule = parse_rule(o.rule, o.abs);
    c.thresholds = parse_thresholds(o.thresholds);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  c.delta = o.delta;
  c.host = o.host;
  c.port = o.port;
  c.strict = o.strict;
  c.threads = o.threads;
  for (const auto& s : o.stacks) c.stack_paths.emplace_back(s);
  try {
    c.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

LoadResult load_for(const AppConfig& c) {
  if (c.manifest_path.empty()) throw UsageError("--manifest is required");
  if (!fs::exists(c.manifest_path)) {
    throw UsageError("manifest not found: '" + c.manifest_path.string() + "'");
  }
  LoadOptions options;
  options.strict = c.strict;
  options.default_delta = c.delta;
  return load_corpus(c.manifest_path, c.data_root, options);
}

int cmd_score(const CliOptions& o, std::ostream& out, std::ostream& err) {
  const AppConfig c = make_config(o);
  const auto format = parse_report_format(o.format);
  if (!format) throw UsageError("unknown --format '" + o.format + "' (expected csv or jsonl)");

  LoadResult loaded = load_for(c);
  ScoreResult result = score_corpus(loaded.corpus, c.rule, c.thresholds, c.threads);

  std::vector<Diagnostic> diagnostics = loaded.diagnostics;
  diagnostics.insert(diagnostics.end(), result.diagnostics.begin(), result.diagnostics.end());

  const fs::path dir(o.out);
  fs::create_directories(dir);
  const fs::path report = dir / (*format == ReportFormat::csv ? "scores.csv" : "scores.jsonl");
  export_report(report, result.scored, *format);

  nlohmann::json summary = summary_json(result.scored);
  summary["rule"] = to_string(c.rule);
  summary["abs"] = c.rule.take_absolute;
  summary["thresholds"] = to_string(c.thresholds);
  summary["delta"] = c.delta;
  summary["manifest"] = c.manifest_path.string();
  summary["report"] = report.filename().string();
  nlohmann::json diag = nlohmann::json::array();
  for (const auto& d : diagnostics) {
    std::ostringstream line;
    line << d;
    diag.push_back(line.str());
  }
  summary["diagnostics"] = diag;
  {
    std::ofstream s(dir / "summary.json", std::ios::binary | std::ios::trunc);
    if (!s) throw Error(ErrorCode::io, "cannot write summary.json in '" + dir.string() + "'");
    s << summary.dump(2) << '\n';
  }

  for (const auto& d : diagnostics) err << "diagnostic: " << d << '\n';
  out << "scored " << result.scored.size() << " instances -> " << report.string() << '\n';
  if (!diagnostics.empty()) {
    err << diagnostics.size() << " diagnostics\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_probe(const CliOptions& o, std::ostream& out) {
  if (o.k < 1) throw UsageError("--k must be >= 1");
  const auto metric = parse_metric(o.metric);
  if (!metric) throw UsageError("unknown --metric '" + o.metric + "'");
  if (o.stacks.empty()) throw UsageError("--stack is required");
  if (o.image.empty()) throw UsageError("--image is required");
  if (o.annotation.empty()) throw UsageError("--annotation is required");

  std::optional<SaliencyStack> stack;
  for (const auto& path : o.stacks) {
    SaliencyStack s = load_stack(path);
    if (s.image_id() == o.image) {
      stack.emplace(std::move(s));
      break;
    }
  }
  if (!stack) throw Error(ErrorCode::not_found, "unknown image '" + o.image + "'");

  ProbeQuery q;
  q.image_id = o.image;
  q.annotation = read_feature_set(o.annotation, stack->dims());
  q.metric = *metric;
  q.k = static_cast<std::size_t>(o.k);
  const ProbeResult result = probe(*stack, q);
  for (std::size_t i = 0; i < result.ranking.size(); ++i) {
    out << (i + 1) << ' ' << result.ranking[i].class_name << ' '
        << format_score(result.ranking[i].score) << '\n';
  }
  return kExitOk;
}

int cmd_serve(const CliOptions& o, std::ostream& out, std::ostream& err) {
  const AppConfig c = make_config(o);
  LoadResult loaded = load_for(c);
  for (const auto& d : loaded.diagnostics) err << "diagnostic: " << d << '\n';
  std::vector<SaliencyStack> stacks;
  for (const auto& p : c.stack_paths) stacks.push_back(load_stack(p));

  Service service(c, std::move(loaded.corpus), std::move(stacks));
  httplib::Server server;
  service.bind(server);
  if (!server.bind_to_port(c.host, c.port)) {
    err << "error: cannot bind " << c.host << ':' << c.port << '\n';
    return kExitRuntime;
  }
  out << "serving " << service.scored().size() << " instances on http://" << c.host << ':'
      << c.port << std::endl;
  return server.listen_after_bind() ? kExitOk : kExitRuntime;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shared Interest alignment scoring, exploration and probing", "si"};
  app.set_config("--config", "", "Flat key=value file; keys are the long flag names");
  app.require_subcommand(1, 1);

  CliOptions o;
  app.add_option("--manifest", o.manifest, "Instance manifest (JSON Lines)");
  app.add_option("--data-root", o.data_root, "Directory payload paths resolve against");
  app.add_option("--rule", o.rule,
                 "mean_plus_sigma=K | mean | top_fraction=P | top_n=N | gt_size | positive_top_n=N");
  app.add_flag("--abs", o.abs, "Threshold absolute saliency values");
  app.add_option("--delta", o.delta, "Regression correctness tolerance");
  app.add_option("--thresholds", o.thresholds, "Case cut-offs, e.g. high_iou=0.7,low_sc=0.3");
  app.add_option("--metric", o.metric, "Probe metric: iou | gtc | sc");
  app.add_option("--k", o.k, "Number of probe results");
  app.add_option("--port", o.port, "HTTP port");
  app.add_option("--host", o.host, "HTTP listen address");
  app.add_option("--format", o.format, "Report format: csv | jsonl");
  app.add_option("--out", o.out, "Output directory for score reports");
  app.add_flag("--strict", o.strict, "Fail on the first invalid manifest record");
  app.add_option("--threads", o.threads, "Scoring threads");
  app.add_option("--stack", o.stacks, "Saliency stack manifest (repeatable)");
  app.add_option("--image", o.image, "Probe image id");
  app.add_option("--annotation", o.annotation, "Probe annotation: u8 mask or index list");

  auto* score = app.add_subcommand("score", "Score, classify and export a corpus")->fallthrough();
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API")->fallthrough();
  auto* probe_cmd = app.add_subcommand("probe", "Rank classes against an annotation")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (score->parsed()) return cmd_score(o, out, err);
    if (probe_cmd->parsed()) return cmd_probe(o, out);
    if (serve->parsed()) return cmd_serve(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace si
