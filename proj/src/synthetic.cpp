#include "oboi/synthetic.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.h"
#include "oboi/dataset.h"
#include "oboi/error.h"
#include "oboi/rng.h"
#include "oboi/tensor.h"

namespace oboi {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::kInvalidSpec, what); }

// Grid-aligned box sizes (rows, cols) covering 25-75% of the grid.
std::vector<std::pair<std::size_t, std::size_t>> box_shapes(std::size_t rows, std::size_t cols) {
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  const std::size_t cells = rows * cols;
  for (std::size_t h = 1; h <= rows; ++h) {
    for (std::size_t w = 1; w <= cols; ++w) {
      // 4 * area in [cells, 3 * cells]
      if (4 * h * w >= cells && 4 * h * w <= 3 * cells) shapes.emplace_back(h, w);
    }
  }
  return shapes;
}

std::string indexed(const char* prefix, std::size_t i, int width) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

void check_synthetic_spec(const SyntheticSpec& spec) {
  if (spec.object_names.empty()) invalid("at least one object is required");
  std::set<std::string> names(spec.object_names.begin(), spec.object_names.end());
  if (names.size() != spec.object_names.size()) invalid("object names must be unique");
  for (const auto& n : spec.object_names) {
    if (n.empty()) invalid("object names must be non-empty");
  }
  if (spec.instances_per_object == 0) invalid("instances_per_object must be at least 1");
  if (spec.sequences == 0) invalid("sequences must be at least 1");
  if (spec.samples_per_cell == 0) invalid("samples_per_cell must be at least 1");
  if (spec.height == 0 || spec.width == 0 || spec.depth == 0) invalid("feature_dims must be positive");
  if (!(spec.image_height > 0) || !(spec.image_width > 0)) invalid("image_size must be positive");
  if (spec.profiles.size() != spec.instances_per_object) {
    invalid("instance_profiles must have one entry per instance of an object");
  }
  for (const auto& p : spec.profiles) {
    if (!std::isfinite(p.mean) || !(p.std >= 0) || !std::isfinite(p.std)) invalid("bad instance profile");
    if (!(p.asymmetry >= 0 && p.asymmetry <= 1)) invalid("asymmetry must be in [0, 1]");
  }
  if (!(spec.sample_jitter >= 0) || !(spec.background_mean_spread >= 0) || !(spec.logits_noise >= 0)) {
    invalid("spreads and noise levels must be non-negative");
  }
  if (!(spec.background_std_min >= 0) || !(spec.background_std_max >= spec.background_std_min)) {
    invalid("background std range must satisfy 0 <= min <= max");
  }
  if (box_shapes(spec.height, spec.width).empty()) invalid("feature grid admits no 25-75% box");
}

SyntheticSpec synthetic_spec_from_json(std::string_view text) {
  SyntheticSpec spec;
  try {
    json doc = json::parse(text);
    const json& objects = doc.at("objects");
    if (objects.is_number_unsigned()) {
      for (std::size_t o = 0; o < objects.get<std::size_t>(); ++o) spec.object_names.push_back(indexed("obj", o, 1));
    } else {
      spec.object_names = objects.get<std::vector<std::string>>();
    }
    spec.instances_per_object = doc.value("instances_per_object", spec.instances_per_object);
    spec.sequences = doc.value("sequences", spec.sequences);
    spec.samples_per_cell = doc.value("samples_per_cell", spec.samples_per_cell);
    if (doc.contains("feature_dims")) {
      auto dims = doc.at("feature_dims").get<std::vector<std::size_t>>();
      if (dims.size() != 3) invalid("feature_dims needs [H', W', D]");
      spec.height = dims[0];
      spec.width = dims[1];
      spec.depth = dims[2];
    }
    if (doc.contains("image_size")) {
      auto size = doc.at("image_size").get<std::vector<double>>();
      if (size.size() != 2) invalid("image_size needs [H, W]");
      spec.image_height = size[0];
      spec.image_width = size[1];
    }
    spec.object_mean_offset = doc.value("object_mean_offset", spec.object_mean_offset);
    spec.sample_jitter = doc.value("sample_jitter", spec.sample_jitter);
    if (doc.contains("instance_profiles")) {
      for (const auto& p : doc.at("instance_profiles")) {
        spec.profiles.push_back({p.value("mean", 0.0), p.value("std", 1.0), p.value("asymmetry", 0.0)});
      }
    } else {
      // Distinct means, otherwise identical.
      for (std::size_t j = 0; j < spec.instances_per_object; ++j) {
        spec.profiles.push_back({static_cast<double>(j), 1.0, 0.0});
      }
    }
    if (doc.contains("background")) {
      const json& bg = doc.at("background");
      spec.background_mean_spread = bg.value("mean_spread", spec.background_mean_spread);
      spec.background_std_min = bg.value("std_min", spec.background_std_min);
      spec.background_std_max = bg.value("std_max", spec.background_std_max);
    }
    if (doc.contains("logits")) {
      const json& lg = doc.at("logits");
      spec.emit_logits = lg.value("enabled", true);
      spec.logits_noise = lg.value("noise", spec.logits_noise);
    }
  } catch (const json::exception& e) {
    invalid(std::string("malformed synthetic spec: ") + e.what());
  }
  check_synthetic_spec(spec);
  return spec;
}

SyntheticSpec load_synthetic_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return synthetic_spec_from_json(buf.str());
}

SyntheticSummary gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed, const fs::path& out_dir) {
  check_synthetic_spec(spec);
  fs::create_directories(out_dir / "tensors");
  if (spec.emit_logits) fs::create_directories(out_dir / "logits");
  Rng rng(seed);

  Dataset ds;
  ds.root = out_dir;
  const std::size_t n_obj = spec.object_names.size();
  std::vector<std::string> instances, owners;
  for (std::size_t o = 0; o < n_obj; ++o) {
    for (std::size_t j = 0; j < spec.instances_per_object; ++j) {
      instances.push_back(spec.object_names[o] + "_" + std::to_string(j + 1));
      owners.push_back(spec.object_names[o]);
    }
  }
  ds.label_space = LabelSpace(spec.object_names, instances, owners);
  for (std::size_t s = 0; s < spec.sequences; ++s) ds.sequences.push_back(indexed("seq", s, 2));

  // Background statistics per sequence.
  std::vector<std::vector<double>> bg_mean(spec.sequences, std::vector<double>(spec.depth));
  std::vector<double> bg_std(spec.sequences);
  for (std::size_t s = 0; s < spec.sequences; ++s) {
    for (auto& m : bg_mean[s]) m = spec.background_mean_spread * rng.normal();
    bg_std[s] = rng.uniform(spec.background_std_min, spec.background_std_max);
  }

  const auto shapes = box_shapes(spec.height, spec.width);
  const double cell_h = spec.image_height / static_cast<double>(spec.height);
  const double cell_w = spec.image_width / static_cast<double>(spec.width);
  const std::vector<std::uint64_t> dims{spec.height, spec.width, spec.depth};
  const std::vector<std::uint64_t> logit_dims{n_obj};
  std::vector<float> values(spec.height * spec.width * spec.depth);
  std::vector<float> logits(n_obj);

  for (std::size_t i = 0; i < instances.size(); ++i) {
    const std::size_t o = i / spec.instances_per_object;
    const InstanceProfile& prof = spec.profiles[i % spec.instances_per_object];
    const double mu = spec.object_mean_offset * static_cast<double>(o) + prof.mean;
    const double a = prof.asymmetry;
    const double g_weight = std::sqrt(1.0 - a * a);
    for (std::size_t s = 0; s < spec.sequences; ++s) {
      for (std::size_t k = 0; k < spec.samples_per_cell; ++k) {
        const auto [bh, bw] = shapes[rng.below(shapes.size())];
        const std::size_t r0 = rng.below(spec.height - bh + 1);
        const std::size_t c0 = rng.below(spec.width - bw + 1);
        const double jitter = spec.sample_jitter * rng.normal();
        for (std::size_t r = 0; r < spec.height; ++r) {
          for (std::size_t c = 0; c < spec.width; ++c) {
            const bool inside = r >= r0 && r < r0 + bh && c >= c0 && c < c0 + bw;
            float* cell = values.data() + (r * spec.width + c) * spec.depth;
            for (std::size_t d = 0; d < spec.depth; ++d) {
              double v;
              if (inside) {
                double z = g_weight * rng.normal();
                if (a > 0) z += a * (rng.exponential() - 1.0);
                v = mu + jitter + prof.std * z;
              } else {
                v = bg_mean[s][d] + bg_std[s] * rng.normal();
              }
              cell[d] = static_cast<float>(v);
            }
          }
        }

        Sample sample;
        sample.instance_label = instances[i];
        sample.sequence_id = ds.sequences[s];
        sample.sample_id = instances[i] + "-" + ds.sequences[s] + "-" + indexed("", k, 4);
        sample.image_size = {spec.image_height, spec.image_width};
        sample.bbox = {static_cast<double>(c0) * cell_w, static_cast<double>(r0) * cell_h,
                       static_cast<double>(c0 + bw) * cell_w, static_cast<double>(r0 + bh) * cell_h};
        sample.predicted_object = owners[i];
        sample.feature_ref = "tensors/" + sample.sample_id + ".bin";
        write_tensor(out_dir / sample.feature_ref, dims, values);
        if (spec.emit_logits) {
          for (std::size_t q = 0; q < n_obj; ++q) {
            logits[q] = static_cast<float>((q == o ? 1.0 : 0.0) + spec.logits_noise * rng.normal());
          }
          sample.logits_ref = "logits/" + sample.sample_id + ".bin";
          write_tensor(out_dir / *sample.logits_ref, logit_dims, logits);
        }
        ds.samples.push_back(std::move(sample));
      }
    }
  }

  SyntheticSummary summary{n_obj, instances.size(), spec.sequences, ds.samples.size(), out_dir / "manifest.json"};
  write_manifest(summary.manifest, ds);
  return summary;
}

}  // namespace oboi
