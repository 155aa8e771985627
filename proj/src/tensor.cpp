#include "oboi/tensor.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "oboi/error.h"

namespace oboi {
namespace {

constexpr std::size_t kFixedHeader = 8 + 4 + 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

// Element count, or throws kCorruptTensor/kShapeMismatch on overflow.
std::uint64_t element_count(std::span<const std::uint64_t> dims, ErrorCode on_error) {
  std::uint64_t n = 1;
  for (auto d : dims) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / 4 / d) {
      throw Error(on_error, "tensor dims overflow");
    }
    n *= d;
  }
  return n;
}

struct Header {
  std::vector<std::uint64_t> dims;
  std::uint64_t count = 0;
};

// Parses the header from `bytes` (which may be only a prefix of the file) and
// checks it against the full file length.
Header parse_header(std::span<const std::uint8_t> bytes, std::uint64_t file_length) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kTensorMagic, 8) != 0) {
    throw Error(ErrorCode::kNotATensorFile, "bad tensor magic");
  }
  if (bytes.size() < kFixedHeader) throw Error(ErrorCode::kCorruptTensor, "truncated tensor header");
  std::uint32_t version = get_u32(bytes.data() + 8);
  if (version != kTensorVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "unsupported tensor version " + std::to_string(version));
  }
  std::uint32_t rank = get_u32(bytes.data() + 12);
  if (rank != 1 && rank != 3) {
    throw Error(ErrorCode::kCorruptTensor, "unsupported tensor rank " + std::to_string(rank));
  }
  if (bytes.size() < kFixedHeader + 8 * rank) {
    throw Error(ErrorCode::kCorruptTensor, "truncated tensor header");
  }
  Header h;
  for (std::uint32_t i = 0; i < rank; ++i) h.dims.push_back(get_u64(bytes.data() + kFixedHeader + 8 * i));
  h.count = element_count(h.dims, ErrorCode::kCorruptTensor);
  std::uint64_t expected = kFixedHeader + 8 * rank + 4 * h.count;
  if (file_length != expected) {
    throw Error(ErrorCode::kCorruptTensor, "tensor length " + std::to_string(file_length) +
                                               " does not match declared size " +
                                               std::to_string(expected));
  }
  return h;
}

}  // namespace

std::size_t tensor_file_size(std::span<const std::uint64_t> dims) {
  return kFixedHeader + 8 * dims.size() +
         4 * static_cast<std::size_t>(element_count(dims, ErrorCode::kShapeMismatch));
}

std::vector<std::uint8_t> encode_tensor(std::span<const std::uint64_t> dims,
                                        std::span<const float> values) {
  if (dims.size() != 1 && dims.size() != 3) {
    throw Error(ErrorCode::kShapeMismatch, "tensor rank must be 1 or 3");
  }
  for (auto d : dims) {
    if (d == 0) throw Error(ErrorCode::kShapeMismatch, "tensor dims must be positive");
  }
  if (element_count(dims, ErrorCode::kShapeMismatch) != values.size()) {
    throw Error(ErrorCode::kShapeMismatch, "value count does not match dims");
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kRejectedValue, "non-finite tensor value");
  }
  std::vector<std::uint8_t> out;
  out.reserve(tensor_file_size(dims));
  out.insert(out.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
  put_u32(out, kTensorVersion);
  put_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put_u64(out, d);
  for (float v : values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  Header h = parse_header(bytes, bytes.size());
  Tensor t;
  t.dims = std::move(h.dims);
  t.values.resize(h.count);
  const std::uint8_t* p = bytes.data() + kFixedHeader + 8 * t.dims.size();
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    t.values[i] = std::bit_cast<float>(get_u32(p + 4 * i));
  }
  return t;
}

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                  std::span<const float> values) {
  auto bytes = encode_tensor(dims, values);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to '" + path.string() + "'");
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingTensor, "cannot open tensor '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

std::vector<std::uint64_t> read_tensor_dims(const std::filesystem::path& path) {
  std::error_code ec;
  auto length = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kMissingTensor, "cannot open tensor '" + path.string() + "'");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingTensor, "cannot open tensor '" + path.string() + "'");
  std::vector<std::uint8_t> head(kFixedHeader + 8 * 3);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  return parse_header(head, length).dims;
}

}  // namespace oboi
