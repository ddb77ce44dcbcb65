#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <random>
#include <sstream>

#include "shared_interest/error.hpp"
#include "shared_interest/run_length.hpp"
#include "shared_interest/tensor_io.hpp"
#include "support.hpp"

using namespace si;

namespace {

ErrorCode read_error(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_tensor(in);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a read error for: " << bytes.substr(0, 40));
  return ErrorCode::io;
}

std::string serialize(const Tensor& t) {
  std::ostringstream out;
  write_tensor(out, t);
  return out.str();
}

}  // namespace

TEST_CASE("header and byte layout are bit-exact") {
  const Tensor mask = Tensor::from_mask({2, 3}, {0, 1, 1, 0, 0, 1});
  const std::string bytes = serialize(mask);
  CHECK(bytes == std::string("SI-TENSOR v1 dtype=u8 dims=2x3\n") + std::string("\0\1\1\0\0\1", 6));

  const Tensor values = Tensor::from_values({1}, {1.0f});
  // 1.0f is 0x3f800000, little-endian.
  CHECK(serialize(values) == std::string("SI-TENSOR v1 dtype=f32 dims=1\n") +
                                 std::string("\x00\x00\x80\x3f", 4));
  CHECK(tensor_header(DType::f32, {3, 4, 5}) == "SI-TENSOR v1 dtype=f32 dims=3x4x5\n");
}

TEST_CASE("write/read round-trips bit-exactly") {
  std::mt19937 rng(42);
  std::uniform_int_distribution<std::uint32_t> bits;
  std::uniform_int_distribution<std::size_t> axis(1, 9);
  std::uniform_int_distribution<int> rank(1, 3);
  for (int t = 0; t < 100; ++t) {
    Dims dims(rank(rng));
    for (auto& d : dims) d = axis(rng);
    const std::size_t n = element_count(dims);

    std::vector<float> f(n);
    for (auto& x : f) {
      std::uint32_t b = bits(rng);
      if (((b >> 23) & 0xff) == 0xff) b &= ~(1u << 30);  // keep values finite
      std::memcpy(&x, &b, 4);
    }
    const Tensor tf = Tensor::from_values(dims, f);
    std::istringstream in(serialize(tf));
    const Tensor back = read_tensor(in);
    REQUIRE(back.dims == dims);
    REQUIRE(std::memcmp(back.f32.data(), f.data(), 4 * n) == 0);

    std::vector<std::uint8_t> m(n);
    for (auto& x : m) x = static_cast<std::uint8_t>(bits(rng) & 1);
    const Tensor tm = Tensor::from_mask(dims, m);
    std::istringstream in2(serialize(tm));
    REQUIRE(read_tensor(in2) == tm);
  }
}

TEST_CASE("file round-trip of a packed 1000x8x8 stack") {
  test::TempDir dir;
  std::vector<float> v(1000 * 64);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i) * 0.001f - 3.0f;
  const Tensor t = Tensor::from_values({1000, 8, 8}, v);
  write_tensor(dir / "stack.sit", t);
  CHECK(read_tensor(dir / "stack.sit") == t);
  CHECK(looks_like_tensor(dir / "stack.sit"));
}

TEST_CASE("malformed payloads are structural errors") {
  const std::string body(4, '\0');
  CHECK(read_error("") == ErrorCode::malformed_tensor);
  CHECK(read_error("SI-TENSOR v1 dtype=u8 dims=4") == ErrorCode::malformed_tensor);  // no newline
  CHECK(read_error("SI-TENSR v1 dtype=u8 dims=4\n" + body) == ErrorCode::malformed_tensor);
  CHECK(read_error("SI-TENSOR v2 dtype=u8 dims=4\n" + body) == ErrorCode::malformed_tensor);
  CHECK(read_error("SI-TENSOR v1 dtype=f64 dims=4\n" + body) == ErrorCode::malformed_tensor);
  CHECK(read_error("SI-TENSOR v1 dtype=u8 dims=0\n") == ErrorCode::malformed_tensor);
  CHECK(read_error("SI-TENSOR v1 dtype=u8 dims=2x2x\n" + body) == ErrorCode::malformed_tensor);
  CHECK(read_error("SI-TENSOR v1 dtype=u8 dims=1x1x2x2\n" + body) == ErrorCode::malformed_tensor);
  CHECK(read_error("SI-TENSOR v1 dtype=u8 dims=4 extra\n" + body) == ErrorCode::malformed_tensor);
  CHECK(read_error("SI-TENSOR  v1 dtype=u8 dims=4\n" + body) == ErrorCode::malformed_tensor);
  CHECK(read_error("SI-TENSOR v1 dtype=u8 shape=4\n" + body) == ErrorCode::malformed_tensor);
  CHECK(read_error("SI-TENSOR v1 dtype=u8 dims=5\n" + body) == ErrorCode::malformed_tensor);  // truncated
  CHECK(read_error("SI-TENSOR v1 dtype=u8 dims=3\n" + body) == ErrorCode::malformed_tensor);  // trailing
  CHECK(read_error("SI-TENSOR v1 dtype=f32 dims=2\n" + body) == ErrorCode::malformed_tensor);
  CHECK_THROWS_AS(read_tensor(std::filesystem::path("/nonexistent/x.sit")), Error);
}

TEST_CASE("index lists and feature-set payloads") {
  test::TempDir dir;
  test::write_file(dir / "gt.txt", "1 4 5\n9\n");
  CHECK(read_feature_set(dir / "gt.txt", {10}) == FeatureSet(10, {1, 4, 5, 9}));
  test::write_file(dir / "unsorted.txt", "4 1");
  CHECK_THROWS_AS(read_feature_set(dir / "unsorted.txt", {10}), Error);
  test::write_file(dir / "range.txt", "12");
  CHECK_THROWS_AS(read_feature_set(dir / "range.txt", {10}), Error);
  test::write_file(dir / "junk.txt", "1 x");
  CHECK_THROWS_AS(read_feature_set(dir / "junk.txt", {10}), Error);

  write_index_list(dir / "out.txt", FeatureSet(10, {0, 3}));
  CHECK(test::read_file(dir / "out.txt") == "0 3\n");

  write_tensor(dir / "m.sit", Tensor::from_mask({2, 2}, {1, 0, 0, 1}));
  CHECK(read_feature_set(dir / "m.sit", {2, 2}) == FeatureSet(4, {0, 3}));
  CHECK_THROWS_AS(read_feature_set(dir / "m.sit", {4}), Error);
  write_tensor(dir / "bad.sit", Tensor::from_mask({2}, {1, 3}));
  CHECK_THROWS_AS(read_feature_set(dir / "bad.sit", {2}), Error);
  write_tensor(dir / "f.sit", Tensor::from_values({2}, {1, 3}));
  CHECK_THROWS_AS(read_feature_set(dir / "f.sit", {2}), Error);
  CHECK_THROWS_AS(read_feature_set(dir / "missing.txt", {2}), Error);
}

TEST_CASE("run-length index lists") {
  CHECK(encode_runs(FeatureSet(10, {1, 2, 3, 7, 9})) == std::vector<Run>{{1, 3}, {7, 1}, {9, 1}});
  CHECK(encode_runs(FeatureSet(4)).empty());
  CHECK(decode_runs({{0, 2}, {2, 1}}, 4) == FeatureSet(4, {0, 1, 2}));
  CHECK_THROWS_AS(decode_runs({{0, 0}}, 4), Error);
  CHECK_THROWS_AS(decode_runs({{2, 2}, {1, 1}}, 4), Error);
  CHECK_THROWS_AS(decode_runs({{3, 2}}, 4), Error);

  std::mt19937 rng(8);
  for (int t = 0; t < 500; ++t) {
    const auto s = test::random_set(rng, 1 + t, (t % 10) / 10.0);
    const auto runs = encode_runs(s);
    for (std::size_t i = 1; i < runs.size(); ++i) {
      REQUIRE(runs[i].first > runs[i - 1].first + runs[i - 1].second);  // maximal runs
    }
    REQUIRE(decode_runs(runs, s.universe_size()) == s);
  }
}
