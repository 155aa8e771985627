#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace oboi {

// Value distribution of instance j (the same profile applies to the j-th
// instance of every object). In-box values are
//   object_offset * o + mean + std * z,  z = sqrt(1 - a^2) g + a (E - 1)
// with g ~ N(0, 1), E ~ Exp(1): z has zero mean, unit variance and skewness
// 2 a^3, so `asymmetry` moves only the third and higher moments.
struct InstanceProfile {
  double mean = 0.0;
  double std = 1.0;
  double asymmetry = 0.0;  // in [0, 1]
};

struct SyntheticSpec {
  std::vector<std::string> object_names;  // size = number of objects
  std::size_t instances_per_object = 2;
  std::size_t sequences = 3;
  std::size_t samples_per_cell = 10;  // per (instance, sequence)
  std::size_t height = 8;             // H'
  std::size_t width = 8;              // W'
  std::size_t depth = 16;             // D
  double image_height = 256.0;
  double image_width = 256.0;
  double object_mean_offset = 1.0;
  double sample_jitter = 0.0;  // std of a per-sample additive offset
  std::vector<InstanceProfile> profiles;  // size = instances_per_object
  // Out-of-box cells: per sequence, per channel mean ~ N(0, mean_spread^2);
  // per sequence std ~ U[std_min, std_max].
  double background_mean_spread = 0.0;
  double background_std_min = 1.0;
  double background_std_max = 1.0;
  bool emit_logits = false;
  double logits_noise = 0.1;
};

struct SyntheticSummary {
  std::size_t objects = 0;
  std::size_t instances = 0;
  std::size_t sequences = 0;
  std::size_t samples = 0;
  std::filesystem::path manifest;
};

// Throws Error(kInvalidSpec).
void check_synthetic_spec(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(std::string_view text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

// Writes out_dir/manifest.json, out_dir/tensors/*.bin (and logits/*.bin).
// Output bytes depend only on (spec, seed).
SyntheticSummary gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed,
                               const std::filesystem::path& out_dir);

}  // namespace oboi
