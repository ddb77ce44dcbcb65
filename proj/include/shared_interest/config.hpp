#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "shared_interest/corpus.hpp"
#include "shared_interest/discretize.hpp"
#include "shared_interest/taxonomy.hpp"

namespace si {

struct AppConfig {
  std::filesystem::path data_root = ".";
  std::filesystem::path manifest_path;
  ThresholdRule rule = ThresholdRule::mean_plus_sigma(1.0);
  CaseThresholds thresholds;
  double delta = kDefaultRegressionDelta;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::filesystem::path> stack_paths;
  bool strict = false;
  unsigned threads = 1;

  /// Throws ErrorCode::invalid_argument on a negative delta or bad port.
  void validate() const;
};

}  // namespace si
