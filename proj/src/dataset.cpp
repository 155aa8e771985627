#include "oboi/dataset.h"

#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "oboi/error.h"
#include "oboi/tensor.h"
#include "json_util.h"

namespace oboi {
namespace {

using nlohmann::json;

constexpr const char* kManifestFormat = "oboi-dataset";
constexpr int kManifestVersion = 1;

// Fills `out` from `doc`, recording structural problems in `report`.
// Returns false when the document is too broken to continue.
bool parse_manifest(const json& doc, Dataset& out, ValidationReport& report) {
  auto problem = [&](std::string subject, std::string message) {
    report.push_back({"ManifestSyntax", std::move(subject), std::move(message)});
  };
  try {
    if (!doc.is_object()) {
      problem("manifest", "top level must be an object");
      return false;
    }
    if (doc.value("format", "") != kManifestFormat) problem("format", "expected \"oboi-dataset\"");
    if (doc.value("version", 0) != kManifestVersion) problem("version", "expected version 1");

    out.label_space = detail::label_space_from_json(doc.at("label_space"));
    out.sequences = doc.at("sequences").get<std::vector<std::string>>();

    for (const auto& s : doc.at("samples")) {
      Sample sample;
      sample.sample_id = s.at("id").get<std::string>();
      sample.instance_label = s.at("instance").get<std::string>();
      sample.sequence_id = s.at("sequence").get<std::string>();
      auto size = s.at("image_size").get<std::vector<double>>();
      auto box = s.at("bbox").get<std::vector<double>>();
      if (size.size() != 2 || box.size() != 4) {
        problem(sample.sample_id, "image_size needs [H, W] and bbox needs [x1, y1, x2, y2]");
        continue;
      }
      sample.image_size = {size[0], size[1]};
      sample.bbox = {box[0], box[1], box[2], box[3]};
      sample.predicted_object = s.at("predicted_object").get<std::string>();
      sample.feature_ref = s.at("features").get<std::string>();
      if (s.contains("logits") && !s.at("logits").is_null()) {
        sample.logits_ref = s.at("logits").get<std::string>();
      }
      out.samples.push_back(std::move(sample));
    }
  } catch (const json::exception& e) {
    problem("manifest", e.what());
    return false;
  }
  return true;
}

// Most frequent value; ties resolve to the value seen first.
std::size_t mode_of(const std::vector<std::size_t>& values) {
  std::map<std::size_t, std::size_t> counts;
  for (auto v : values) ++counts[v];
  std::size_t best = values.front(), best_count = 0;
  for (auto v : values) {
    if (counts[v] > best_count) {
      best = v;
      best_count = counts[v];
    }
  }
  return best;
}

void check_dataset(Dataset& ds, ValidationReport& report) {
  for (auto& v : validate_label_space(ds.label_space)) {
    report.push_back({v.rule, v.subject, v.message});
  }
  std::unordered_set<std::string> seqs;
  for (const auto& s : ds.sequences) {
    if (!seqs.insert(s).second) {
      report.push_back({"DuplicateSequence", s, "sequence '" + s + "' declared more than once"});
    }
  }

  std::unordered_set<std::string> ids;
  // (sample index, D) for each readable feature tensor, same for logits.
  std::vector<std::pair<std::size_t, std::size_t>> depths, logit_sizes;
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    const Sample& s = ds.samples[k];
    const std::string& id = s.sample_id;
    if (!ids.insert(id).second) {
      report.push_back({"DuplicateSample", id, "sample id declared more than once"});
    }
    if (!ds.label_space.instance_index(s.instance_label)) {
      report.push_back({"UnknownInstance", id, "unknown instance '" + s.instance_label + "'"});
    }
    if (!seqs.count(s.sequence_id)) {
      report.push_back({"UnknownSequence", id, "unknown sequence '" + s.sequence_id + "'"});
    }
    if (!ds.label_space.object_index(s.predicted_object)) {
      report.push_back({"UnknownObject", id, "unknown predicted object '" + s.predicted_object + "'"});
    }
    if (!box_is_valid(s.bbox, s.image_size)) {
      report.push_back({"InvalidBox", id, "bbox outside image or empty"});
    }
    try {
      auto dims = read_tensor_dims(ds.root / s.feature_ref);
      if (dims.size() != 3) {
        report.push_back({"RankMismatch", id, "feature tensor must have rank 3"});
      } else {
        depths.emplace_back(k, static_cast<std::size_t>(dims[2]));
      }
    } catch (const Error& e) {
      report.push_back({std::string(error_name(e.code())), id, e.what()});
    }
    if (s.logits_ref) {
      try {
        auto dims = read_tensor_dims(ds.root / *s.logits_ref);
        if (dims.size() != 1) {
          report.push_back({"RankMismatch", id, "logits tensor must have rank 1"});
        } else {
          logit_sizes.emplace_back(k, static_cast<std::size_t>(dims[0]));
        }
      } catch (const Error& e) {
        report.push_back({std::string(error_name(e.code())), id, std::string("logits: ") + e.what()});
      }
    }
  }

  auto check_common = [&](const std::vector<std::pair<std::size_t, std::size_t>>& sizes,
                          const char* what) -> std::size_t {
    std::vector<std::size_t> values;
    for (auto& [k, d] : sizes) values.push_back(d);
    std::size_t common = mode_of(values);
    for (auto& [k, d] : sizes) {
      if (d != common) {
        report.push_back({"DimMismatch", ds.samples[k].sample_id,
                          std::string(what) + " size " + std::to_string(d) + " differs from " +
                              std::to_string(common)});
      }
    }
    return common;
  };
  if (!depths.empty()) ds.feature_depth = check_common(depths, "feature depth");
  if (!logit_sizes.empty()) ds.logits_size = check_common(logit_sizes, "logits");
}

Dataset load_checked(const std::filesystem::path& manifest_path, ValidationReport& report) {
  Dataset ds;
  ds.root = manifest_path.parent_path();
  json doc;
  try {
    doc = detail::read_json(manifest_path);
  } catch (const Error& e) {
    report.push_back({std::string(error_name(e.code())), manifest_path.string(), e.what()});
    return ds;
  }
  if (parse_manifest(doc, ds, report)) check_dataset(ds, report);
  return ds;
}

}  // namespace

std::unordered_map<std::string, std::size_t> Dataset::sample_lookup() const {
  std::unordered_map<std::string, std::size_t> lookup;
  lookup.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) lookup.emplace(samples[k].sample_id, k);
  return lookup;
}

std::optional<std::size_t> Dataset::sequence_index(std::string_view id) const {
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (sequences[s] == id) return s;
  }
  return std::nullopt;
}

FeatureMap load_feature_map(const Dataset& dataset, const Sample& sample) {
  Tensor t = read_tensor(dataset.root / sample.feature_ref);
  if (t.dims.size() != 3) {
    throw Error(ErrorCode::kShapeMismatch, "feature tensor of '" + sample.sample_id + "' is not rank 3");
  }
  FeatureMap map;
  map.height = static_cast<std::size_t>(t.dims[0]);
  map.width = static_cast<std::size_t>(t.dims[1]);
  map.depth = static_cast<std::size_t>(t.dims[2]);
  map.data = std::move(t.values);
  return map;
}

std::vector<float> load_logits(const Dataset& dataset, const Sample& sample) {
  if (!sample.logits_ref) {
    throw Error(ErrorCode::kMissingLogits, "sample '" + sample.sample_id + "' has no logits");
  }
  Tensor t = read_tensor(dataset.root / *sample.logits_ref);
  if (t.dims.size() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "logits tensor of '" + sample.sample_id + "' is not rank 1");
  }
  return std::move(t.values);
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  ValidationReport report;
  Dataset ds = load_checked(manifest_path, report);
  for (const auto& e : report) {
    if (e.kind == "MissingTensor") {
      throw Error(ErrorCode::kMissingTensor, "missing tensor for sample '" + e.subject + "'");
    }
  }
  if (!report.empty()) {
    std::ostringstream msg;
    msg << "invalid manifest '" << manifest_path.string() << "' (" << report.size() << " problems)";
    for (const auto& e : report) msg << "\n  " << e.kind << " [" << e.subject << "]: " << e.message;
    throw Error(ErrorCode::kInvalidManifest, msg.str());
  }
  return ds;
}

ValidationReport validate_dataset(const std::filesystem::path& manifest_path) {
  ValidationReport report;
  load_checked(manifest_path, report);
  return report;
}

void write_manifest(const std::filesystem::path& manifest_path, const Dataset& dataset) {
  json doc;
  doc["format"] = kManifestFormat;
  doc["version"] = kManifestVersion;
  doc["label_space"] = detail::label_space_to_json(dataset.label_space);
  doc["sequences"] = dataset.sequences;
  json samples = json::array();
  for (const auto& s : dataset.samples) {
    json j = {{"id", s.sample_id},
              {"instance", s.instance_label},
              {"sequence", s.sequence_id},
              {"image_size", {s.image_size.height, s.image_size.width}},
              {"bbox", {s.bbox.x1, s.bbox.y1, s.bbox.x2, s.bbox.y2}},
              {"predicted_object", s.predicted_object},
              {"features", s.feature_ref}};
    if (s.logits_ref) j["logits"] = *s.logits_ref;
    samples.push_back(std::move(j));
  }
  doc["samples"] = std::move(samples);
  detail::write_json(manifest_path, doc);
}

Dataset restrict_dataset(const Dataset& dataset, const LabelSpace& space) {
  Dataset out;
  out.root = dataset.root;
  out.label_space = space;
  out.sequences = dataset.sequences;
  out.feature_depth = dataset.feature_depth;
  out.logits_size = dataset.logits_size;
  for (const auto& s : dataset.samples) {
    if (space.instance_index(s.instance_label)) out.samples.push_back(s);
  }
  return out;
}

std::string report_to_json(const ValidationReport& report) {
  json entries = json::array();
  for (const auto& e : report) {
    entries.push_back({{"kind", e.kind}, {"subject", e.subject}, {"message", e.message}});
  }
  json doc = {{"clean", report.empty()}, {"problems", entries}};
  return doc.dump(2);
}

}  // namespace oboi
