#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "shared_interest/config.hpp"
#include "shared_interest/corpus.hpp"
#include "shared_interest/probe.hpp"

namespace httplib {
class Server;
}

namespace si {

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using QueryParams = std::multimap<std::string, std::string>;

/// Paging defaults for GET /api/instances.
inline constexpr std::size_t kDefaultPageLimit = 20;

/// Parses the /api/instances query string into filter, sort and page.
/// Throws ErrorCode::unknown_key or invalid_argument on bad parameters.
struct InstanceQuery {
  InstanceFilter filter;
  InstanceSort sort;
  std::size_t offset = 0;
  std::size_t limit = kDefaultPageLimit;
};
InstanceQuery parse_instance_query(const QueryParams& params);

nlohmann::json instance_json(const ScoredInstance& s, bool with_sets);

/// Read-only HTTP views over a scored corpus and loaded stacks. All state is
/// fixed at construction, so handlers may run concurrently.
class Service {
 public:
  Service(AppConfig config, Corpus corpus, std::vector<SaliencyStack> stacks);

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ApiResponse health() const;
  ApiResponse instances(const QueryParams& params) const;
  ApiResponse instance(const std::string& id) const;
  ApiResponse image(const std::string& id) const;
  ApiResponse summary() const;
  ApiResponse stacks() const;
  ApiResponse probe(const std::string& body) const;
  ApiResponse config() const;

  void bind(httplib::Server& server) const;

  const std::vector<ScoredInstance>& scored() const noexcept { return scored_; }
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  AppConfig config_;
  Corpus corpus_;
  std::vector<SaliencyStack> stacks_;
  std::vector<ScoredInstance> scored_;
  std::vector<Diagnostic> diagnostics_;
};

nlohmann::json config_json(const AppConfig& config);

/// Case counts and the three score histograms. An empty input yields zero
/// counts rather than an error.
nlohmann::json summary_json(const std::vector<ScoredInstance>& scored);

nlohmann::json error_json(const std::exception& e);

}  // namespace si
