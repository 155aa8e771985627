#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oboi/dataset.h"
#include "oboi/reduction.h"
#include "oboi/types.h"

namespace oboi {

// Mask + reduce for one stored sample. Logits are only read for mode=logits.
Embedding embed_sample(const Sample& sample, const FeatureMap& features,
                       const ReductionConfig& config,
                       std::optional<std::span<const float>> logits = std::nullopt);

// none: identity. L2N: x / |x|. CL2N: (x - shift) / |x - shift|.
// Zero vectors pass through unchanged. Throws kMissingStats for CL2N without
// stats.
Embedding simpleshot_transform(std::span<const double> x, const Standardizer* stats,
                               TransformKind kind);

struct Prototype {
  Embedding mean;  // raw (pre-transform) mean of the support embeddings
  std::size_t support_count = 0;

  bool operator==(const Prototype&) const = default;
};

struct Classification {
  std::size_t predicted = kNoIndex;  // instance index in the bag's label space
  // Candidate instances in declaration order with their squared distances.
  std::vector<std::pair<std::size_t, double>> distances;
  std::optional<std::size_t> conditioned_on;  // object index

  std::optional<double> distance_to(std::size_t instance) const;
};

// Object-conditioned bag of instance prototypes. Immutable: add_instance()
// returns a new bag.
class InstanceBag {
 public:
  InstanceBag(LabelSpace label_space, ReductionConfig reduction, HeadConfig head);

  const LabelSpace& label_space() const { return label_space_; }
  const ReductionConfig& reduction_config() const { return reduction_; }
  const HeadConfig& head_config() const { return head_; }
  // Keyed by instance declaration index.
  const std::map<std::size_t, Prototype>& prototypes() const { return prototypes_; }
  const std::optional<Standardizer>& transform_stats() const { return stats_; }

  bool empty() const { return prototypes_.empty(); }
  // Embedding size, 0 for an empty bag.
  std::size_t dims() const;
  // Whether this configuration fits (shift, scale) on the support set.
  bool needs_stats() const;

  // Query-time projection: optional standardization, then the head transform.
  Embedding project(std::span<const double> x) const;

  // Nearest prototype among instances of `predicted_object` (or all
  // instances when unconditioned). Ties go to the lowest declaration index.
  // Throws kShapeMismatch, kUnknownObject, kNoCandidates.
  Classification classify(std::span<const double> query, std::string_view predicted_object) const;
  Classification classify(std::span<const double> query, std::size_t predicted_object) const;

  // Reassembles a bag from stored parts (used by load_bag). Checks invariants,
  // throws kInvalidManifest.
  static InstanceBag from_parts(LabelSpace label_space, ReductionConfig reduction, HeadConfig head,
                                std::map<std::size_t, Prototype> prototypes,
                                std::optional<Standardizer> stats);

 private:
  friend InstanceBag add_instance(const InstanceBag&, std::string_view, std::span<const Embedding>,
                                  bool);
  friend InstanceBag build_bag(std::span<const std::pair<std::string, Embedding>>, LabelSpace,
                               ReductionConfig, HeadConfig);

  void insert(std::size_t instance, Prototype prototype);

  LabelSpace label_space_;
  ReductionConfig reduction_;
  HeadConfig head_;
  std::map<std::size_t, Prototype> prototypes_;
  std::optional<Standardizer> stats_;
  std::map<std::size_t, Embedding> projected_;  // project(prototype.mean)
};

// Per-dimension arithmetic mean; insensitive to the order of `rows`.
Embedding mean_embedding(std::span<const Embedding> rows);

// Prototype per instance = mean of its support embeddings. When the config
// needs stats they are fitted on all support embeddings jointly and frozen.
// Instances without support are simply absent. Throws kEmptySupport,
// kUnknownInstance, kShapeMismatch.
InstanceBag build_bag(std::span<const std::pair<std::string, Embedding>> support,
                      LabelSpace label_space, ReductionConfig reduction, HeadConfig head);

struct SupportSample {
  Sample sample;
  FeatureMap features;
  std::optional<std::vector<float>> logits;
};

InstanceBag build_bag(std::span<const SupportSample> support, LabelSpace label_space,
                      ReductionConfig reduction, HeadConfig head);

// Adds one instance. Existing prototypes and frozen stats are kept; an empty
// bag that needs stats fits them on this support. Throws kDuplicateInstance
// unless `replace`, kUnknownInstance, kEmptySupport, kShapeMismatch.
InstanceBag add_instance(const InstanceBag& bag, std::string_view instance,
                         std::span<const Embedding> support, bool replace = false);

// Bag directory: bag.json plus one TensorFile per prototype (rank 1, float32)
// and, when present, stats/shift.bin and stats/scale.bin.
void save_bag(const std::filesystem::path& dir, const InstanceBag& bag);
InstanceBag load_bag(const std::filesystem::path& dir);
ValidationReport validate_bag(const std::filesystem::path& dir);

}  // namespace oboi
