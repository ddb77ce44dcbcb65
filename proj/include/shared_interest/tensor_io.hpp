#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "shared_interest/feature_set.hpp"
#include "shared_interest/saliency_field.hpp"

// SI-TENSOR v1 payloads: one ASCII header line
//
//   SI-TENSOR v1 dtype=<u8|f32> dims=<d0>[x<d1>[x<d2>]]\n
//
// followed by raw little-endian row-major data and nothing else.

namespace si {

enum class DType { u8, f32 };

struct Tensor {
  DType dtype = DType::f32;
  Dims dims;
  std::vector<std::uint8_t> u8;  // populated when dtype == u8
  std::vector<float> f32;        // populated when dtype == f32

  static Tensor from_mask(Dims dims, std::vector<std::uint8_t> data);
  static Tensor from_values(Dims dims, std::vector<float> data);

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Errors are ErrorCode::malformed_tensor (bad header, truncated or trailing
/// data) or ErrorCode::io.
Tensor read_tensor(std::istream& in);
Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(std::ostream& out, const Tensor& tensor);
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);

std::string tensor_header(DType dtype, const Dims& dims);
bool looks_like_tensor(const std::filesystem::path& path);

/// Whitespace-separated, strictly increasing ASCII indices.
FeatureSet read_index_list(std::istream& in, std::size_t universe_size);
FeatureSet read_index_list(const std::filesystem::path& path, std::size_t universe_size);
void write_index_list(const std::filesystem::path& path, const FeatureSet& set);

/// A ground-truth or pre-discretized payload: a u8 SI-TENSOR mask or an
/// index list. `dims` names the expected feature shape.
FeatureSet read_feature_set(const std::filesystem::path& path, const Dims& dims);

}  // namespace si
