#include "oboi/types.h"

#include <cmath>
#include <unordered_set>

#include "oboi/error.h"

namespace oboi {

LabelSpace::LabelSpace(std::vector<std::string> object_classes,
                       std::vector<std::string> instance_classes,
                       std::vector<std::string> instance_objects)
    : objects_(std::move(object_classes)),
      instances_(std::move(instance_classes)),
      instance_objects_(std::move(instance_objects)) {
  instance_objects_.resize(instances_.size());
  for (std::size_t o = 0; o < objects_.size(); ++o) object_lookup_.emplace(objects_[o], o);
  for (std::size_t i = 0; i < instances_.size(); ++i) instance_lookup_.emplace(instances_[i], i);

  members_.resize(objects_.size());
  object_of_.assign(instances_.size(), kNoIndex);
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    auto it = object_lookup_.find(instance_objects_[i]);
    if (it == object_lookup_.end()) continue;
    // Duplicated instance ids only count once, under their first declaration.
    if (instance_lookup_.at(instances_[i]) != i) continue;
    object_of_[i] = it->second;
    members_[it->second].push_back(i);
  }
}

std::optional<std::size_t> LabelSpace::instance_index(std::string_view id) const {
  auto it = instance_lookup_.find(std::string(id));
  if (it == instance_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> LabelSpace::object_index(std::string_view id) const {
  auto it = object_lookup_.find(std::string(id));
  if (it == object_lookup_.end()) return std::nullopt;
  return it->second;
}

const std::string& instance_to_object(const LabelSpace& space, std::string_view instance) {
  auto idx = space.instance_index(instance);
  if (!idx) {
    throw Error(ErrorCode::kUnknownInstance, "unknown instance '" + std::string(instance) + "'");
  }
  return space.instance_objects()[*idx];
}

std::vector<Violation> validate_label_space(const LabelSpace& space) {
  std::vector<Violation> out;
  std::unordered_set<std::string> seen;
  for (const auto& o : space.object_classes()) {
    if (!seen.insert(o).second) {
      out.push_back({"DuplicateObject", o, "object id '" + o + "' declared more than once"});
    }
  }
  seen.clear();
  for (std::size_t i = 0; i < space.num_instances(); ++i) {
    const auto& id = space.instance_classes()[i];
    if (!seen.insert(id).second) {
      out.push_back({"DuplicateInstance", id, "instance id '" + id + "' declared more than once"});
      continue;
    }
    if (space.object_index_of(i) == kNoIndex) {
      const auto& obj = space.instance_objects()[i];
      out.push_back({"UnknownObject", id,
                     "instance '" + id + "' maps to undeclared object '" + obj + "'"});
    }
  }
  for (std::size_t o = 0; o < space.num_objects(); ++o) {
    // Duplicate objects are reported above; only the first copy owns members.
    if (space.object_index(space.object_classes()[o]) != o) continue;
    if (space.instances_of(o).empty()) {
      const auto& obj = space.object_classes()[o];
      out.push_back({"EmptyObject", obj, "object '" + obj + "' has no instances"});
    }
  }
  return out;
}

bool box_is_valid(const BoundingBox& b, const ImageSize& image) {
  for (double v : {b.x1, b.y1, b.x2, b.y2, image.height, image.width}) {
    if (!std::isfinite(v)) return false;
  }
  return image.height > 0 && image.width > 0 && 0 <= b.x1 && b.x1 < b.x2 &&
         b.x2 <= image.width && 0 <= b.y1 && b.y1 < b.y2 && b.y2 <= image.height;
}

int ReductionConfig::blocks() const {
  switch (mode) {
    case ReductionMode::kLogits: return 0;
    case ReductionMode::kEe: return 1;
    case ReductionMode::kAee: return order;
  }
  return 0;
}

void check_reduction_config(const ReductionConfig& config) {
  if (config.mode == ReductionMode::kAee && (config.order < 1 || config.order > 8)) {
    throw Error(ErrorCode::kInvalidConfig,
                "moment order R must be in [1, 8], got " + std::to_string(config.order));
  }
}

std::string_view to_string(ReductionMode mode) {
  switch (mode) {
    case ReductionMode::kLogits: return "logits";
    case ReductionMode::kEe: return "ee";
    case ReductionMode::kAee: return "aee";
  }
  return "?";
}

std::string_view to_string(HeadKind head) {
  return head == HeadKind::kProtoNet ? "protonet" : "simpleshot";
}

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::kNone: return "none";
    case TransformKind::kL2N: return "L2N";
    case TransformKind::kCL2N: return "CL2N";
  }
  return "?";
}

ReductionMode parse_reduction_mode(std::string_view text) {
  if (text == "logits") return ReductionMode::kLogits;
  if (text == "ee") return ReductionMode::kEe;
  if (text == "aee") return ReductionMode::kAee;
  throw Error(ErrorCode::kInvalidConfig, "unknown reduction mode '" + std::string(text) + "'");
}

HeadKind parse_head_kind(std::string_view text) {
  if (text == "protonet") return HeadKind::kProtoNet;
  if (text == "simpleshot") return HeadKind::kSimpleShot;
  throw Error(ErrorCode::kInvalidConfig, "unknown head '" + std::string(text) + "'");
}

TransformKind parse_transform_kind(std::string_view text) {
  if (text == "none") return TransformKind::kNone;
  if (text == "L2N" || text == "l2n") return TransformKind::kL2N;
  if (text == "CL2N" || text == "cl2n") return TransformKind::kCL2N;
  throw Error(ErrorCode::kInvalidConfig, "unknown transform '" + std::string(text) + "'");
}

}  // namespace oboi
