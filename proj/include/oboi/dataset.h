#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oboi/types.h"

namespace oboi {

// One problem found while checking a manifest or bag. `kind` is a stable
// machine-readable tag (MissingTensor, DimMismatch, UnknownInstance, ...).
struct ReportEntry {
  std::string kind;
  std::string subject;
  std::string message;
};

using ValidationReport = std::vector<ReportEntry>;

// A labelled set of samples whose feature tensors live next to the manifest.
// Tensor payloads are loaded on demand; refs are relative to `root`.
struct Dataset {
  std::filesystem::path root;
  LabelSpace label_space;
  std::vector<std::string> sequences;
  std::vector<Sample> samples;
  std::size_t feature_depth = 0;            // common D
  std::optional<std::size_t> logits_size;   // common logits length, if any sample has logits

  std::unordered_map<std::string, std::size_t> sample_lookup() const;
  std::optional<std::size_t> sequence_index(std::string_view id) const;
};

FeatureMap load_feature_map(const Dataset& dataset, const Sample& sample);
// Throws Error(kMissingLogits) when the sample carries no logits ref.
std::vector<float> load_logits(const Dataset& dataset, const Sample& sample);

// Parses and fully validates a manifest. Tensor headers are checked eagerly,
// payloads are not read. Throws kMissingTensor(sample id) for the first
// missing tensor, otherwise kInvalidManifest listing every problem.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Same checks as load_dataset, never throws for data problems.
ValidationReport validate_dataset(const std::filesystem::path& manifest_path);

// Writes `dataset` as <path> with refs kept as given (relative to root).
void write_manifest(const std::filesystem::path& manifest_path, const Dataset& dataset);

// Restricts a dataset to a new label space: samples of instances absent from
// `space` are dropped, order is preserved.
Dataset restrict_dataset(const Dataset& dataset, const LabelSpace& space);

std::string report_to_json(const ValidationReport& report);

}  // namespace oboi
