#include "oboi/instance_bag.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oboi/error.h"

namespace oboi {
namespace {

void normalize_in_place(Embedding& x) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  if (sq == 0.0) return;
  const double norm = std::sqrt(sq);
  for (double& v : x) v /= norm;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

// Stored state is kept at float32 precision, the precision of the bag's
// TensorFiles, so save/load round-trips bit-exactly.
Embedding to_storage(Embedding x) {
  for (double& v : x) v = static_cast<double>(static_cast<float>(v));
  return x;
}

Standardizer to_storage(Standardizer s) {
  for (double& v : s.scale) {
    v = static_cast<double>(static_cast<float>(v));
    if (v == 0.0) v = 1.0;
  }
  return Standardizer{to_storage(std::move(s.shift)), std::move(s.scale)};
}

std::size_t require_instance(const LabelSpace& space, std::string_view id) {
  auto idx = space.instance_index(id);
  if (!idx) throw Error(ErrorCode::kUnknownInstance, "unknown instance '" + std::string(id) + "'");
  return *idx;
}

}  // namespace

Embedding embed_sample(const Sample& sample, const FeatureMap& features,
                       const ReductionConfig& config,
                       std::optional<std::span<const float>> logits) {
  if (config.mode == ReductionMode::kLogits) return reduce(features, Mask{}, config, logits);
  Mask mask = build_mask(sample.bbox, sample.image_size, features.height, features.width);
  return reduce(features, mask, config);
}

Embedding simpleshot_transform(std::span<const double> x, const Standardizer* stats,
                               TransformKind kind) {
  Embedding y(x.begin(), x.end());
  switch (kind) {
    case TransformKind::kNone:
      return y;
    case TransformKind::kL2N:
      normalize_in_place(y);
      return y;
    case TransformKind::kCL2N:
      if (stats == nullptr) throw Error(ErrorCode::kMissingStats, "CL2N requires centering statistics");
      if (stats->shift.size() != y.size()) {
        throw Error(ErrorCode::kShapeMismatch, "centering statistics differ in size");
      }
      for (std::size_t i = 0; i < y.size(); ++i) y[i] -= stats->shift[i];
      normalize_in_place(y);
      return y;
  }
  return y;
}

std::optional<double> Classification::distance_to(std::size_t instance) const {
  for (const auto& [i, d] : distances) {
    if (i == instance) return d;
  }
  return std::nullopt;
}

InstanceBag::InstanceBag(LabelSpace label_space, ReductionConfig reduction, HeadConfig head)
    : label_space_(std::move(label_space)), reduction_(reduction), head_(head) {
  check_reduction_config(reduction_);
}

std::size_t InstanceBag::dims() const {
  return prototypes_.empty() ? 0 : prototypes_.begin()->second.mean.size();
}

bool InstanceBag::needs_stats() const {
  return reduction_.standardize || head_.effective_transform() == TransformKind::kCL2N;
}

Embedding InstanceBag::project(std::span<const double> x) const {
  const TransformKind kind = head_.effective_transform();
  if (!reduction_.standardize) return simpleshot_transform(x, stats_ ? &*stats_ : nullptr, kind);
  if (!stats_) throw Error(ErrorCode::kMissingStats, "standardize requires support statistics");
  Embedding y = stats_->apply(x);
  // Standardized support is already centred, so CL2N reduces to L2N here.
  return simpleshot_transform(y, nullptr, kind == TransformKind::kCL2N ? TransformKind::kL2N : kind);
}

void InstanceBag::insert(std::size_t instance, Prototype prototype) {
  prototype.mean = to_storage(std::move(prototype.mean));
  projected_[instance] = project(prototype.mean);
  prototypes_[instance] = std::move(prototype);
}

Classification InstanceBag::classify(std::span<const double> query,
                                     std::string_view predicted_object) const {
  if (!head_.conditioned) return classify(query, kNoIndex);
  auto obj = label_space_.object_index(predicted_object);
  if (!obj) {
    throw Error(ErrorCode::kUnknownObject, "unknown predicted object '" + std::string(predicted_object) + "'");
  }
  return classify(query, *obj);
}

Classification InstanceBag::classify(std::span<const double> query, std::size_t predicted_object) const {
  if (prototypes_.empty()) throw Error(ErrorCode::kNoCandidates, "bag is empty");
  if (query.size() != dims()) {
    throw Error(ErrorCode::kShapeMismatch, "query has " + std::to_string(query.size()) +
                                               " dims, bag has " + std::to_string(dims()));
  }
  Classification result;
  bool conditioned = head_.conditioned;
  if (conditioned) {
    if (predicted_object >= label_space_.num_objects()) {
      throw Error(ErrorCode::kUnknownObject, "predicted object index out of range");
    }
    bool any = std::any_of(prototypes_.begin(), prototypes_.end(), [&](const auto& kv) {
      return label_space_.object_index_of(kv.first) == predicted_object;
    });
    if (!any) {
      if (!head_.fallback_unconditioned) {
        throw Error(ErrorCode::kNoCandidates, "no instances of object '" +
                                                  label_space_.object_classes()[predicted_object] +
                                                  "' in bag");
      }
      conditioned = false;
    }
  }
  if (conditioned) result.conditioned_on = predicted_object;

  const Embedding q = project(query);
  double best = std::numeric_limits<double>::infinity();
  result.distances.reserve(projected_.size());
  for (const auto& [instance, proto] : projected_) {
    if (conditioned && label_space_.object_index_of(instance) != predicted_object) continue;
    const double d = squared_distance(q, proto);
    result.distances.emplace_back(instance, d);
    // Strict comparison keeps the lowest declaration index on ties.
    if (d < best) {
      best = d;
      result.predicted = instance;
    }
  }
  // All distances infinite (overflow): fall back to the first candidate.
  if (result.predicted == kNoIndex) result.predicted = result.distances.front().first;
  return result;
}

InstanceBag InstanceBag::from_parts(LabelSpace label_space, ReductionConfig reduction, HeadConfig head,
                                    std::map<std::size_t, Prototype> prototypes,
                                    std::optional<Standardizer> stats) {
  InstanceBag bag(std::move(label_space), reduction, head);
  if (stats) bag.stats_ = to_storage(std::move(*stats));
  std::size_t dims = prototypes.empty() ? 0 : prototypes.begin()->second.mean.size();
  for (auto& [instance, proto] : prototypes) {
    if (instance >= bag.label_space_.num_instances()) {
      throw Error(ErrorCode::kInvalidManifest, "prototype for unknown instance index");
    }
    if (proto.support_count < 1) {
      throw Error(ErrorCode::kInvalidManifest, "prototype with zero support");
    }
    if (proto.mean.size() != dims || dims == 0) {
      throw Error(ErrorCode::kInvalidManifest, "prototypes differ in dimensionality");
    }
  }
  if (bag.stats_ && !prototypes.empty() &&
      (bag.stats_->shift.size() != dims || bag.stats_->scale.size() != dims)) {
    throw Error(ErrorCode::kInvalidManifest, "transform stats differ in dimensionality");
  }
  if (bag.needs_stats() && !prototypes.empty() && !bag.stats_) {
    throw Error(ErrorCode::kInvalidManifest, "configuration requires transform stats");
  }
  for (auto& [instance, proto] : prototypes) bag.insert(instance, std::move(proto));
  return bag;
}

Embedding mean_embedding(std::span<const Embedding> rows) {
  if (rows.empty()) throw Error(ErrorCode::kEmptySupport, "mean of no embeddings");
  const std::size_t dims = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != dims) throw Error(ErrorCode::kShapeMismatch, "embeddings differ in size");
  }
  Embedding mean(dims);
  std::vector<double> column(rows.size());
  for (std::size_t i = 0; i < dims; ++i) {
    for (std::size_t k = 0; k < rows.size(); ++k) column[k] = rows[k][i];
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double v : column) sum += v;
    mean[i] = sum / static_cast<double>(rows.size());
  }
  return mean;
}

InstanceBag build_bag(std::span<const std::pair<std::string, Embedding>> support,
                      LabelSpace label_space, ReductionConfig reduction, HeadConfig head) {
  if (support.empty()) throw Error(ErrorCode::kEmptySupport, "empty support set");
  InstanceBag bag(std::move(label_space), reduction, head);

  std::map<std::size_t, std::vector<Embedding>> grouped;
  std::vector<Embedding> all;
  all.reserve(support.size());
  for (const auto& [id, emb] : support) {
    grouped[require_instance(bag.label_space_, id)].push_back(emb);
    all.push_back(emb);
  }
  for (const auto& e : all) {
    if (e.size() != all.front().size()) throw Error(ErrorCode::kShapeMismatch, "embeddings differ in size");
  }
  if (bag.needs_stats()) bag.stats_ = to_storage(standardizer_fit(all));
  for (auto& [instance, rows] : grouped) {
    bag.insert(instance, Prototype{mean_embedding(rows), rows.size()});
  }
  return bag;
}

InstanceBag build_bag(std::span<const SupportSample> support, LabelSpace label_space,
                      ReductionConfig reduction, HeadConfig head) {
  std::vector<std::pair<std::string, Embedding>> rows;
  rows.reserve(support.size());
  for (const auto& s : support) {
    std::optional<std::span<const float>> logits;
    if (s.logits) logits = std::span<const float>(*s.logits);
    rows.emplace_back(s.sample.instance_label, embed_sample(s.sample, s.features, reduction, logits));
  }
  return build_bag(rows, std::move(label_space), reduction, head);
}

InstanceBag add_instance(const InstanceBag& bag, std::string_view instance,
                         std::span<const Embedding> support, bool replace) {
  const std::size_t idx = require_instance(bag.label_space(), instance);
  if (bag.prototypes().count(idx) && !replace) {
    throw Error(ErrorCode::kDuplicateInstance, "instance '" + std::string(instance) + "' already in bag");
  }
  if (support.empty()) throw Error(ErrorCode::kEmptySupport, "no support for '" + std::string(instance) + "'");
  Embedding mean = mean_embedding(support);
  if (!bag.empty() && mean.size() != bag.dims()) {
    throw Error(ErrorCode::kShapeMismatch, "support dims differ from bag dims");
  }
  InstanceBag out = bag;
  if (out.needs_stats() && !out.stats_) {
    std::vector<Embedding> rows(support.begin(), support.end());
    out.stats_ = to_storage(standardizer_fit(rows));
  }
  out.insert(idx, Prototype{std::move(mean), support.size()});
  return out;
}

}  // namespace oboi
