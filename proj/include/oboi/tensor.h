#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace oboi {

// TensorFile layout (little-endian throughout):
//   magic   8 bytes  "OBOITNSR"
//   version u32      1
//   rank    u32      1 (logits) or 3 (feature maps)
//   dims    rank x u64
//   payload product(dims) x f32, row-major
inline constexpr char kTensorMagic[8] = {'O', 'B', 'O', 'I', 'T', 'N', 'S', 'R'};
inline constexpr std::uint32_t kTensorVersion = 1;

struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<float> values;
};

std::size_t tensor_file_size(std::span<const std::uint64_t> dims);

// Throws Error(kShapeMismatch) on bad rank/length, Error(kRejectedValue) on
// non-finite values.
std::vector<std::uint8_t> encode_tensor(std::span<const std::uint64_t> dims,
                                        std::span<const float> values);

// Throws kNotATensorFile, kVersionMismatch or kCorruptTensor.
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                  std::span<const float> values);
Tensor read_tensor(const std::filesystem::path& path);

// Reads and checks the header only; the file length must match the dims.
std::vector<std::uint64_t> read_tensor_dims(const std::filesystem::path& path);

}  // namespace oboi
