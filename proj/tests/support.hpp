#pragma once

// Shared test fixtures and independent oracles. Nothing here calls into the
// scoring code paths it is used to check.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "shared_interest/feature_set.hpp"
#include "shared_interest/tensor_io.hpp"

namespace si::test {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("si-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

// Brute-force coverage: walk the whole universe and count memberships.
struct OracleScores {
  double iou = 0, gtc = 0, sc = 0;
  std::size_t inter = 0, uni = 0;
};

inline OracleScores brute_force_coverage(const std::vector<bool>& g, const std::vector<bool>& s) {
  std::size_t inter = 0, uni = 0, ng = 0, ns = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    inter += g[i] && s[i];
    uni += g[i] || s[i];
    ng += g[i];
    ns += s[i];
  }
  OracleScores o;
  o.inter = inter;
  o.uni = uni;
  if (ns == 0) return o;
  o.iou = static_cast<double>(inter) / static_cast<double>(uni);
  o.gtc = static_cast<double>(inter) / static_cast<double>(ng);
  o.sc = static_cast<double>(inter) / static_cast<double>(ns);
  return o;
}

inline std::vector<bool> membership(const FeatureSet& s) {
  std::vector<bool> m(s.universe_size(), false);
  for (auto i : s.members()) m[i] = true;
  return m;
}

inline FeatureSet random_set(std::mt19937& rng, std::size_t universe, double density) {
  std::bernoulli_distribution pick(density);
  std::vector<FeatureIndex> members;
  for (std::size_t i = 0; i < universe; ++i) {
    if (pick(rng)) members.push_back(static_cast<FeatureIndex>(i));
  }
  return FeatureSet(universe, std::move(members));
}

inline FeatureSet random_nonempty_set(std::mt19937& rng, std::size_t universe, double density) {
  FeatureSet s = random_set(rng, universe, density);
  if (!s.empty()) return s;
  std::uniform_int_distribution<std::size_t> at(0, universe - 1);
  return FeatureSet(universe, {static_cast<FeatureIndex>(at(rng))});
}

inline std::vector<std::uint8_t> rect_mask(std::size_t h, std::size_t w, std::size_t r0,
                                           std::size_t c0, std::size_t r1, std::size_t c1) {
  std::vector<std::uint8_t> m(h * w, 0);
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = c0; c < c1; ++c) m[r * w + c] = 1;
  return m;
}

// One manifest line. Label and prediction are copied verbatim as JSON.
inline std::string manifest_line(const std::string& id, const Dims& dims, const nlohmann::json& label,
                                 const nlohmann::json& prediction, const std::string& gt_ref,
                                 const std::string& saliency_ref,
                                 const std::string& task = "classification",
                                 const std::string& modality = "image") {
  nlohmann::json j = {{"si_manifest_version", 1}, {"id", id},         {"modality", modality},
                      {"dims", dims},             {"task", task},     {"label", label},
                      {"prediction", prediction}, {"gt_ref", gt_ref}, {"saliency_ref", saliency_ref}};
  return j.dump();
}

struct SyntheticCorpus {
  fs::path manifest;
  fs::path root;
  std::size_t size = 0;
};

// Writes `n` side x side image instances: a rectangular ground-truth box and
// a blob of saliency centred either on the box or elsewhere, plus noise.
inline SyntheticCorpus make_synthetic_corpus(const fs::path& root, std::size_t n,
                                             std::size_t side = 32, unsigned seed = 7) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<std::size_t> corner(0, side / 2);
  std::uniform_int_distribution<std::size_t> extent(4, side / 2);
  std::uniform_real_distribution<float> noise(-0.2f, 0.2f);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const char* classes[] = {"moped", "motor_scooter", "church", "trailer_truck"};

  fs::create_directories(root / "payloads");
  std::ofstream manifest(root / "manifest.jsonl", std::ios::trunc);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r0 = corner(rng), c0 = corner(rng);
    const std::size_t r1 = std::min(side, r0 + extent(rng)), c1 = std::min(side, c0 + extent(rng));
    auto mask = rect_mask(side, side, r0, c0, r1, c1);

    const bool on_object = unit(rng) < 0.6;
    const double cr = on_object ? (r0 + r1) / 2.0 : static_cast<double>(corner(rng) + side / 2 - 1);
    const double cc = on_object ? (c0 + c1) / 2.0 : static_cast<double>(corner(rng) + side / 2 - 1);
    const double radius = 2.0 + 6.0 * unit(rng);
    std::vector<float> sal(side * side);
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) {
        const double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
        sal[r * side + c] = static_cast<float>(std::exp(-d2 / (2 * radius * radius))) + noise(rng);
      }
    }

    const std::string id = "img" + std::to_string(1000 + i);
    const std::string label = classes[i % 4];
    const std::string prediction = unit(rng) < 0.7 ? label : classes[(i + 1) % 4];
    write_tensor(root / "payloads" / (id + ".mask.sit"), Tensor::from_mask({side, side}, mask));
    write_tensor(root / "payloads" / (id + ".sal.sit"), Tensor::from_values({side, side}, sal));
    manifest << manifest_line(id, {side, side}, label, prediction, "payloads/" + id + ".mask.sit",
                              "payloads/" + id + ".sal.sit")
             << '\n';
  }
  return {root / "manifest.jsonl", root, n};
}

}  // namespace si::test
