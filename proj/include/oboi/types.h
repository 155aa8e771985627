#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace oboi {

// Reduced vector living in the metric space (EE, AEE or logits).
using Embedding = std::vector<double>;

inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

// Object classes, instance classes and the instance-to-object map f.
//
// Construction never throws: malformed inputs are kept as given so that
// validate_label_space() can report every problem. Lookups resolve to the
// first declaration of a duplicated id. Declaration order is significant and
// is the tie-break order everywhere downstream.
class LabelSpace {
 public:
  LabelSpace() = default;
  LabelSpace(std::vector<std::string> object_classes,
             std::vector<std::string> instance_classes,
             std::vector<std::string> instance_objects);

  const std::vector<std::string>& object_classes() const { return objects_; }
  const std::vector<std::string>& instance_classes() const { return instances_; }
  // Object id of each instance, parallel to instance_classes().
  const std::vector<std::string>& instance_objects() const { return instance_objects_; }

  std::size_t num_objects() const { return objects_.size(); }
  std::size_t num_instances() const { return instances_.size(); }

  std::optional<std::size_t> instance_index(std::string_view id) const;
  std::optional<std::size_t> object_index(std::string_view id) const;

  // Object index of instance `i`, or kNoIndex when f(i) names no object.
  std::size_t object_index_of(std::size_t instance) const { return object_of_[instance]; }

  // Instances whose object is `object`, in declaration order.
  const std::vector<std::size_t>& instances_of(std::size_t object) const {
    return members_[object];
  }

  bool operator==(const LabelSpace& other) const {
    return objects_ == other.objects_ && instances_ == other.instances_ &&
           instance_objects_ == other.instance_objects_;
  }

 private:
  std::vector<std::string> objects_;
  std::vector<std::string> instances_;
  std::vector<std::string> instance_objects_;
  std::unordered_map<std::string, std::size_t> object_lookup_;
  std::unordered_map<std::string, std::size_t> instance_lookup_;
  std::vector<std::size_t> object_of_;
  std::vector<std::vector<std::size_t>> members_;
};

struct Violation {
  std::string rule;     // e.g. "DuplicateInstance"
  std::string subject;  // offending id
  std::string message;
};

// f(instance). Throws Error(kUnknownInstance).
const std::string& instance_to_object(const LabelSpace& space, std::string_view instance);

// Empty iff every LabelSpace invariant holds.
std::vector<Violation> validate_label_space(const LabelSpace& space);

// Pixel coordinates, origin top-left.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
};

struct ImageSize {
  double height = 0.0;
  double width = 0.0;
};

bool box_is_valid(const BoundingBox& box, const ImageSize& image);

struct Sample {
  std::string sample_id;
  std::string instance_label;
  std::string sequence_id;
  ImageSize image_size;
  BoundingBox bbox;
  std::string predicted_object;
  std::string feature_ref;
  std::optional<std::string> logits_ref;
};

// Encoder output for one image, row-major (h, then w, then channel).
struct FeatureMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t depth = 0;
  std::vector<float> data;

  float at(std::size_t h, std::size_t w, std::size_t d) const {
    return data[(h * width + w) * depth + d];
  }
};

enum class ReductionMode { kLogits, kEe, kAee };

struct ReductionConfig {
  ReductionMode mode = ReductionMode::kAee;
  int order = 4;  // R, only read for kAee
  bool standardize = false;
  bool use_mask = true;

  // Number of moment blocks actually produced (1 for ee, 0 for logits).
  int blocks() const;
  bool operator==(const ReductionConfig&) const = default;
};

enum class HeadKind { kProtoNet, kSimpleShot };
enum class TransformKind { kNone, kL2N, kCL2N };

struct HeadConfig {
  HeadKind head = HeadKind::kProtoNet;
  TransformKind simpleshot_transform = TransformKind::kCL2N;
  bool conditioned = true;
  bool fallback_unconditioned = false;

  bool operator==(const HeadConfig&) const = default;

  // Transform applied at query time; ProtoNet never transforms.
  TransformKind effective_transform() const {
    return head == HeadKind::kSimpleShot ? simpleshot_transform : TransformKind::kNone;
  }
};

// Throws Error(kInvalidConfig) when R is outside [1, 8].
void check_reduction_config(const ReductionConfig& config);

std::string_view to_string(ReductionMode mode);
std::string_view to_string(HeadKind head);
std::string_view to_string(TransformKind kind);
// Parsers accept the names produced by to_string; throw Error(kInvalidConfig).
ReductionMode parse_reduction_mode(std::string_view text);
HeadKind parse_head_kind(std::string_view text);
TransformKind parse_transform_kind(std::string_view text);

}  // namespace oboi
