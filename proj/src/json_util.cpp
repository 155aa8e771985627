#include "json_util.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "oboi/error.h"

namespace oboi::detail {

using nlohmann::json;

json label_space_to_json(const LabelSpace& space) {
  json instances = json::array();
  for (std::size_t i = 0; i < space.num_instances(); ++i) {
    instances.push_back({{"id", space.instance_classes()[i]}, {"object", space.instance_objects()[i]}});
  }
  return {{"objects", space.object_classes()}, {"instances", instances}};
}

LabelSpace label_space_from_json(const json& doc) {
  auto objects = doc.at("objects").get<std::vector<std::string>>();
  std::vector<std::string> instances, owners;
  for (const auto& inst : doc.at("instances")) {
    instances.push_back(inst.at("id").get<std::string>());
    owners.push_back(inst.at("object").get<std::string>());
  }
  return LabelSpace(std::move(objects), std::move(instances), std::move(owners));
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidManifest, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "short write to '" + path.string() + "'");
}

double round6(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return std::strtod(buf, nullptr);
}

}  // namespace oboi::detail
