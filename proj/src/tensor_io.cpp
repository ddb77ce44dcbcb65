#include "shared_interest/tensor_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "shared_interest/error.hpp"

namespace si {

namespace {

constexpr std::string_view kMagic = "SI-TENSOR";
constexpr std::size_t kMaxHeader = 256;
constexpr std::size_t kMaxAxes = 3;

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::malformed_tensor, "malformed SI-TENSOR: " + what);
}

std::string_view dtype_name(DType dtype) { return dtype == DType::u8 ? "u8" : "f32"; }

Dims parse_dims(std::string_view text) {
  Dims dims;
  while (true) {
    const auto x = text.find('x');
    const std::string_view part = text.substr(0, x);
    std::size_t d = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), d);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      malformed("bad dims '" + std::string(text) + "'");
    }
    if (d == 0) malformed("zero-length axis");
    dims.push_back(d);
    if (x == std::string_view::npos) break;
    text = text.substr(x + 1);
  }
  if (dims.size() > kMaxAxes) malformed("more than 3 axes");
  return dims;
}

std::uint32_t byteswap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0xff00u) | ((x << 8) & 0xff0000u) | (x << 24);
}

}  // namespace

Tensor Tensor::from_mask(Dims dims, std::vector<std::uint8_t> data) {
  if (element_count(dims) != data.size()) {
    throw Error(ErrorCode::structural, "mask dims " + format_dims(dims) + " do not match " +
                                           std::to_string(data.size()) + " values");
  }
  Tensor t;
  t.dtype = DType::u8;
  t.dims = std::move(dims);
  t.u8 = std::move(data);
  return t;
}

Tensor Tensor::from_values(Dims dims, std::vector<float> data) {
  if (element_count(dims) != data.size()) {
    throw Error(ErrorCode::structural, "tensor dims " + format_dims(dims) + " do not match " +
                                           std::to_string(data.size()) + " values");
  }
  Tensor t;
  t.dtype = DType::f32;
  t.dims = std::move(dims);
  t.f32 = std::move(data);
  return t;
}

std::string tensor_header(DType dtype, const Dims& dims) {
  return std::string(kMagic) + " v1 dtype=" + std::string(dtype_name(dtype)) +
         " dims=" + format_dims(dims) + "\n";
}

Tensor read_tensor(std::istream& in) {
  std::string header;
  char c = 0;
  while (in.get(c) && c != '\n') {
    header.push_back(c);
    if (header.size() > kMaxHeader) malformed("header line too long");
  }
  if (c != '\n') malformed("missing header line");

  std::istringstream fields(header);
  std::string magic, version, dtype_field, dims_field, extra;
  fields >> magic >> version >> dtype_field >> dims_field;
  if (magic != kMagic) malformed("bad magic '" + magic + "'");
  if (version != "v1") malformed("unsupported version '" + version + "'");
  if (fields >> extra) malformed("unexpected header field '" + extra + "'");
  if (header != std::string(kMagic) + " " + version + " " + dtype_field + " " + dims_field) {
    malformed("header fields must be separated by single spaces");
  }

  Tensor t;
  if (dtype_field == "dtype=u8") {
    t.dtype = DType::u8;
  } else if (dtype_field == "dtype=f32") {
    t.dtype = DType::f32;
  } else {
    malformed("unknown dtype field '" + dtype_field + "'");
  }
  if (dims_field.rfind("dims=", 0) != 0) malformed("missing dims field");
  t.dims = parse_dims(std::string_view(dims_field).substr(5));

  const std::size_t n = element_count(t.dims);
  const std::size_t width = t.dtype == DType::u8 ? 1 : 4;
  std::string data(n * width, '\0');
  in.read(data.data(), static_cast<std::streamsize>(data.size()));
  if (static_cast<std::size_t>(in.gcount()) != data.size()) {
    malformed("truncated data: expected " + std::to_string(data.size()) + " bytes, got " +
              std::to_string(in.gcount()));
  }
  if (in.peek() != std::char_traits<char>::eof()) malformed("trailing bytes after data");

  if (t.dtype == DType::u8) {
    t.u8.assign(data.begin(), data.end());
  } else {
    t.f32.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, data.data() + 4 * i, 4);
      if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
      t.f32[i] = std::bit_cast<float>(bits);
    }
  }
  return t;
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open tensor '" + path.string() + "'");
  try {
    return read_tensor(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_tensor(std::ostream& out, const Tensor& tensor) {
  if (tensor.dims.empty() || tensor.dims.size() > kMaxAxes) {
    throw Error(ErrorCode::invalid_argument, "SI-TENSOR holds 1 to 3 axes");
  }
  const std::size_t n = element_count(tensor.dims);
  const std::size_t have = tensor.dtype == DType::u8 ? tensor.u8.size() : tensor.f32.size();
  if (n != have) {
    throw Error(ErrorCode::structural, "tensor dims " + format_dims(tensor.dims) +
                                           " do not match " + std::to_string(have) + " values");
  }
  out << tensor_header(tensor.dtype, tensor.dims);
  if (tensor.dtype == DType::u8) {
    out.write(reinterpret_cast<const char*>(tensor.u8.data()),
              static_cast<std::streamsize>(tensor.u8.size()));
  } else {
    std::string data(4 * n, '\0');
    for (std::size_t i = 0; i < n; ++i) {
      auto bits = std::bit_cast<std::uint32_t>(tensor.f32[i]);
      if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
      std::memcpy(data.data() + 4 * i, &bits, 4);
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
  }
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write tensor '" + path.string() + "'");
  write_tensor(out, tensor);
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

bool looks_like_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char buf[kMagic.size()] = {};
  in.read(buf, sizeof buf);
  return in.gcount() == static_cast<std::streamsize>(sizeof buf) &&
         std::string_view(buf, sizeof buf) == kMagic;
}

FeatureSet read_index_list(std::istream& in, std::size_t universe_size) {
  std::vector<FeatureIndex> members;
  std::string token;
  while (in >> token) {
    FeatureIndex idx = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), idx);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw Error(ErrorCode::malformed_tensor, "bad index '" + token + "' in index list");
    }
    members.push_back(idx);
  }
  try {
    return FeatureSet(universe_size, std::move(members));
  } catch (const Error& e) {
    throw Error(ErrorCode::malformed_tensor, std::string("index list: ") + e.what());
  }
}

FeatureSet read_index_list(const std::filesystem::path& path, std::size_t universe_size) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open index list '" + path.string() + "'");
  try {
    return read_index_list(in, universe_size);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_index_list(const std::filesystem::path& path, const FeatureSet& set) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write index list '" + path.string() + "'");
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << (i ? " " : "") << set.members()[i];
  }
  out << '\n';
}

FeatureSet read_feature_set(const std::filesystem::path& path, const Dims& dims) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::not_found, "payload not found: '" + path.string() + "'");
  }
  if (!looks_like_tensor(path)) return read_index_list(path, element_count(dims));

  Tensor t = read_tensor(path);
  if (t.dtype != DType::u8) {
    throw Error(ErrorCode::malformed_tensor, path.string() + ": expected a u8 mask, found f32");
  }
  if (t.dims != dims) {
    throw Error(ErrorCode::structural, "dim mismatch: mask " + format_dims(t.dims) +
                                           " vs expected " + format_dims(dims));
  }
  try {
    return FeatureSet::from_mask(t.u8);
  } catch (const Error& e) {
    throw Error(ErrorCode::malformed_tensor, path.string() + ": " + e.what());
  }
}

}  // namespace si
