#include <cmath>
#include <cstdio>
#include <set>

#include "json_util.h"
#include "oboi/error.h"
#include "oboi/instance_bag.h"
#include "oboi/tensor.h"

namespace oboi {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kBagFormat = "oboi-bag";
constexpr int kBagVersion = 1;

std::vector<float> to_floats(const Embedding& x) {
  std::vector<float> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<float>(x[i]);
  return out;
}

void write_vector(const fs::path& path, const Embedding& x) {
  std::vector<std::uint64_t> dims{x.size()};
  write_tensor(path, dims, to_floats(x));
}

Embedding read_vector(const fs::path& path) {
  Tensor t = read_tensor(path);
  if (t.dims.size() != 1) throw Error(ErrorCode::kShapeMismatch, "'" + path.string() + "' is not rank 1");
  return Embedding(t.values.begin(), t.values.end());
}

std::string prototype_file(std::size_t instance) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "prototypes/p%05zu.bin", instance);
  return buf;
}

struct BagDocument {
  LabelSpace label_space;
  ReductionConfig reduction;
  HeadConfig head;
  std::vector<std::tuple<std::string, std::size_t, std::string>> prototypes;  // id, count, path
  std::optional<std::pair<std::string, std::string>> stats;                   // shift, scale
};

BagDocument parse_bag(const json& doc) {
  if (doc.value("format", "") != kBagFormat || doc.value("version", 0) != kBagVersion) {
    throw Error(ErrorCode::kInvalidManifest, "not an oboi-bag version 1 document");
  }
  BagDocument b;
  try {
    b.label_space = detail::label_space_from_json(doc.at("label_space"));
    const json& r = doc.at("reduction");
    b.reduction.mode = parse_reduction_mode(r.at("mode").get<std::string>());
    b.reduction.order = r.at("order").get<int>();
    b.reduction.standardize = r.at("standardize").get<bool>();
    b.reduction.use_mask = r.at("use_mask").get<bool>();
    const json& h = doc.at("head");
    b.head.head = parse_head_kind(h.at("head").get<std::string>());
    b.head.simpleshot_transform = parse_transform_kind(h.at("transform").get<std::string>());
    b.head.conditioned = h.at("conditioned").get<bool>();
    b.head.fallback_unconditioned = h.at("fallback_unconditioned").get<bool>();
    for (const auto& p : doc.at("prototypes")) {
      b.prototypes.emplace_back(p.at("instance").get<std::string>(), p.at("support_count").get<std::size_t>(),
                                p.at("tensor").get<std::string>());
    }
    const json& s = doc.at("transform_stats");
    if (!s.is_null()) b.stats = {s.at("shift").get<std::string>(), s.at("scale").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidManifest, std::string("malformed bag document: ") + e.what());
  }
  return b;
}

}  // namespace

void save_bag(const fs::path& dir, const InstanceBag& bag) {
  fs::create_directories(dir);
  fs::remove_all(dir / "prototypes");
  fs::remove_all(dir / "stats");
  fs::create_directories(dir / "prototypes");

  json doc;
  doc["format"] = kBagFormat;
  doc["version"] = kBagVersion;
  doc["label_space"] = detail::label_space_to_json(bag.label_space());
  const auto& r = bag.reduction_config();
  doc["reduction"] = {{"mode", std::string(to_string(r.mode))},
                      {"order", r.order},
                      {"standardize", r.standardize},
                      {"use_mask", r.use_mask}};
  const auto& h = bag.head_config();
  doc["head"] = {{"head", std::string(to_string(h.head))},
                 {"transform", std::string(to_string(h.simpleshot_transform))},
                 {"conditioned", h.conditioned},
                 {"fallback_unconditioned", h.fallback_unconditioned}};
  json protos = json::array();
  for (const auto& [instance, proto] : bag.prototypes()) {
    std::string rel = prototype_file(instance);
    write_vector(dir / rel, proto.mean);
    protos.push_back({{"instance", bag.label_space().instance_classes()[instance]},
                      {"support_count", proto.support_count},
                      {"tensor", rel}});
  }
  doc["prototypes"] = std::move(protos);
  if (const auto& stats = bag.transform_stats()) {
    fs::create_directories(dir / "stats");
    write_vector(dir / "stats/shift.bin", stats->shift);
    write_vector(dir / "stats/scale.bin", stats->scale);
    doc["transform_stats"] = {{"shift", "stats/shift.bin"}, {"scale", "stats/scale.bin"}};
  } else {
    doc["transform_stats"] = nullptr;
  }
  detail::write_json(dir / "bag.json", doc);
}

InstanceBag load_bag(const fs::path& dir) {
  BagDocument b = parse_bag(detail::read_json(dir / "bag.json"));
  auto violations = validate_label_space(b.label_space);
  if (!violations.empty()) {
    throw Error(ErrorCode::kInvalidManifest, "bag label space: " + violations.front().message);
  }
  std::map<std::size_t, Prototype> prototypes;
  for (const auto& [id, count, rel] : b.prototypes) {
    auto idx = b.label_space.instance_index(id);
    if (!idx) throw Error(ErrorCode::kInvalidManifest, "bag prototype for unknown instance '" + id + "'");
    if (prototypes.count(*idx)) throw Error(ErrorCode::kInvalidManifest, "duplicate prototype '" + id + "'");
    prototypes[*idx] = Prototype{read_vector(dir / rel), count};
  }
  std::optional<Standardizer> stats;
  if (b.stats) stats = Standardizer{read_vector(dir / b.stats->first), read_vector(dir / b.stats->second)};
  return InstanceBag::from_parts(std::move(b.label_space), b.reduction, b.head, std::move(prototypes),
                                 std::move(stats));
}

ValidationReport validate_bag(const fs::path& dir) {
  ValidationReport report;
  BagDocument b;
  try {
    b = parse_bag(detail::read_json(dir / "bag.json"));
    check_reduction_config(b.reduction);
  } catch (const Error& e) {
    report.push_back({std::string(error_name(e.code())), (dir / "bag.json").string(), e.what()});
    return report;
  }
  for (auto& v : validate_label_space(b.label_space)) report.push_back({v.rule, v.subject, v.message});

  std::optional<std::size_t> dims;
  auto check_dims = [&](const std::string& subject, std::size_t n) {
    if (!dims) dims = n;
    if (n != *dims) {
      report.push_back({"DimMismatch", subject, "size " + std::to_string(n) + " differs from " +
                                                    std::to_string(*dims)});
    }
  };
  std::set<std::string> seen;
  for (const auto& [id, count, rel] : b.prototypes) {
    if (!b.label_space.instance_index(id)) {
      report.push_back({"UnknownInstance", id, "prototype for unknown instance"});
    }
    if (!seen.insert(id).second) report.push_back({"DuplicateInstance", id, "prototype stored twice"});
    if (count < 1) report.push_back({"EmptySupport", id, "support_count must be at least 1"});
    try {
      Embedding v = read_vector(dir / rel);
      check_dims(id, v.size());
    } catch (const Error& e) {
      report.push_back({std::string(error_name(e.code())), id, e.what()});
    }
  }
  if (dims && b.reduction.mode == ReductionMode::kAee && *dims % static_cast<std::size_t>(b.reduction.order) != 0) {
    report.push_back({"DimMismatch", "prototypes", "embedding size is not a multiple of R"});
  }
  bool needs_stats = b.reduction.standardize || (b.head.head == HeadKind::kSimpleShot &&
                                                 b.head.simpleshot_transform == TransformKind::kCL2N);
  if (b.stats) {
    for (const auto& rel : {b.stats->first, b.stats->second}) {
      try {
        check_dims(rel, read_vector(dir / rel).size());
      } catch (const Error& e) {
        report.push_back({std::string(error_name(e.code())), rel, e.what()});
      }
    }
  } else if (needs_stats && !b.prototypes.empty()) {
    report.push_back({"MissingStats", "transform_stats", "configuration requires transform stats"});
  }
  return report;
}

}  // namespace oboi
