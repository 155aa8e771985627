#include "oboi/episode.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json_util.h"
#include "oboi/error.h"
#include "oboi/rng.h"

namespace oboi {
namespace {

using nlohmann::json;

// cells[instance][sequence] = sample indices in manifest order.
using Cells = std::vector<std::vector<std::vector<std::size_t>>>;

Cells group_cells(const Dataset& ds) {
  Cells cells(ds.label_space.num_instances(), std::vector<std::vector<std::size_t>>(ds.sequences.size()));
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    const Sample& s = ds.samples[k];
    auto inst = ds.label_space.instance_index(s.instance_label);
    auto seq = ds.sequence_index(s.sequence_id);
    if (inst && seq) cells[*inst][*seq].push_back(k);
  }
  return cells;
}

[[noreturn]] void incomplete(const Dataset& ds, std::size_t inst, std::size_t seq, std::size_t need) {
  throw Error(ErrorCode::kIncompleteCoverage,
              "instance '" + ds.label_space.instance_classes()[inst] + "' has fewer than " +
                  std::to_string(need) + " samples in sequence '" + ds.sequences[seq] + "'");
}

// Shared by all protocols: draws `shots` samples per (instance, sequence) for
// the first `support_sequences` sequences, splits the rest 80/20.
Episode split(const Dataset& ds, Protocol protocol, std::size_t shots, std::size_t support_sequences,
              std::uint64_t seed) {
  if (shots == 0) throw Error(ErrorCode::kInvalidConfig, "shots must be at least 1");
  if (ds.sequences.empty()) throw Error(ErrorCode::kIncompleteCoverage, "dataset has no sequences");
  Cells cells = group_cells(ds);
  Rng rng(seed);

  std::vector<std::size_t> support, test, val;
  for (std::size_t inst = 0; inst < cells.size(); ++inst) {
    std::vector<std::size_t> taken;
    for (std::size_t seq = 0; seq < support_sequences; ++seq) {
      std::vector<std::size_t> cell = cells[inst][seq];
      if (cell.size() < shots) incomplete(ds, inst, seq, shots);
      for (std::size_t j = 0; j < shots; ++j) {
        std::size_t r = j + static_cast<std::size_t>(rng.below(cell.size() - j));
        std::swap(cell[j], cell[r]);
        taken.push_back(cell[j]);
      }
    }
    std::sort(taken.begin(), taken.end());
    std::vector<std::size_t> rest;
    for (const auto& cell : cells[inst]) {
      for (std::size_t k : cell) {
        if (!std::binary_search(taken.begin(), taken.end(), k)) rest.push_back(k);
      }
    }
    std::sort(rest.begin(), rest.end());
    rng.shuffle(rest);
    const std::size_t n_test = (4 * rest.size() + 4) / 5;  // ceil(0.8 n)
    support.insert(support.end(), taken.begin(), taken.end());
    test.insert(test.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_test));
    val.insert(val.end(), rest.begin() + static_cast<std::ptrdiff_t>(n_test), rest.end());
  }

  auto ids = [&](std::vector<std::size_t>& idx) {
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (auto k : idx) out.push_back(ds.samples[k].sample_id);
    return out;
  };
  Episode ep;
  ep.protocol = protocol;
  ep.shots = shots;
  ep.seed = seed;
  ep.support = ids(support);
  ep.test = ids(test);
  ep.val = ids(val);
  return ep;
}

}  // namespace

std::string_view to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::k1SAS: return "1sas";
    case Protocol::k1S1S: return "1s1s";
    case Protocol::kKShot: return "kshot";
  }
  return "?";
}

Protocol parse_protocol(std::string_view text) {
  if (text == "1sas") return Protocol::k1SAS;
  if (text == "1s1s") return Protocol::k1S1S;
  if (text == "kshot") return Protocol::kKShot;
  throw Error(ErrorCode::kInvalidConfig, "unknown protocol '" + std::string(text) + "'");
}

Episode split_1sas(const Dataset& dataset, std::uint64_t seed) {
  return split(dataset, Protocol::k1SAS, 1, dataset.sequences.size(), seed);
}

Episode split_1s1s(const Dataset& dataset, std::uint64_t seed) {
  return split(dataset, Protocol::k1S1S, 1, std::min<std::size_t>(1, dataset.sequences.size()), seed);
}

Episode split_kshot(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  return split(dataset, Protocol::kKShot, k, dataset.sequences.size(), seed);
}

Episode make_episode(const Dataset& dataset, Protocol protocol, std::size_t shots, std::uint64_t seed) {
  switch (protocol) {
    case Protocol::k1SAS: return split_1sas(dataset, seed);
    case Protocol::k1S1S: return split_1s1s(dataset, seed);
    case Protocol::kKShot: return split_kshot(dataset, shots, seed);
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown protocol");
}

Dataset select_instances(const Dataset& dataset, std::size_t p) {
  if (p == 0) throw Error(ErrorCode::kInvalidConfig, "instances per object must be at least 1");
  const LabelSpace& ls = dataset.label_space;
  std::vector<char> keep(ls.num_instances(), 0);
  for (std::size_t o = 0; o < ls.num_objects(); ++o) {
    const auto& members = ls.instances_of(o);
    if (members.size() < p) {
      throw Error(ErrorCode::kNotEnoughInstances,
                  "object '" + ls.object_classes()[o] + "' has " + std::to_string(members.size()) +
                      " instances, " + std::to_string(p) + " requested");
    }
    for (std::size_t j = 0; j < p; ++j) keep[members[j]] = 1;
  }
  std::vector<std::string> instances, owners;
  for (std::size_t i = 0; i < ls.num_instances(); ++i) {
    if (!keep[i]) continue;
    instances.push_back(ls.instance_classes()[i]);
    owners.push_back(ls.instance_objects()[i]);
  }
  return restrict_dataset(dataset, LabelSpace(ls.object_classes(), std::move(instances), std::move(owners)));
}

Dataset balance_dataset(const Dataset& dataset, std::uint64_t seed) {
  Cells cells = group_cells(dataset);
  std::size_t smallest = static_cast<std::size_t>(-1);
  for (std::size_t inst = 0; inst < cells.size(); ++inst) {
    for (std::size_t seq = 0; seq < cells[inst].size(); ++seq) {
      if (cells[inst][seq].empty()) incomplete(dataset, inst, seq, 1);
      smallest = std::min(smallest, cells[inst][seq].size());
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> kept;
  for (auto& per_instance : cells) {
    for (auto& cell : per_instance) {
      rng.shuffle(cell);
      kept.insert(kept.end(), cell.begin(), cell.begin() + static_cast<std::ptrdiff_t>(smallest));
    }
  }
  std::sort(kept.begin(), kept.end());
  Dataset out = dataset;
  out.samples.clear();
  for (auto k : kept) out.samples.push_back(dataset.samples[k]);
  return out;
}

std::string episode_to_json(const Episode& ep) {
  json doc = {{"format", "oboi-episode"},
              {"version", 1},
              {"protocol", std::string(to_string(ep.protocol))},
              {"shots", ep.shots},
              {"seed", ep.seed},
              {"support", ep.support},
              {"test", ep.test},
              {"val", ep.val}};
  doc["instances_per_object"] = ep.instances_per_object ? json(*ep.instances_per_object) : json(nullptr);
  return doc.dump(2) + "\n";
}

Episode episode_from_json(std::string_view text) {
  try {
    json doc = json::parse(text);
    if (doc.value("format", "") != "oboi-episode") {
      throw Error(ErrorCode::kInvalidManifest, "not an oboi-episode document");
    }
    Episode ep;
    ep.protocol = parse_protocol(doc.at("protocol").get<std::string>());
    ep.shots = doc.at("shots").get<std::size_t>();
    ep.seed = doc.at("seed").get<std::uint64_t>();
    if (!doc.at("instances_per_object").is_null()) {
      ep.instances_per_object = doc.at("instances_per_object").get<std::size_t>();
    }
    ep.support = doc.at("support").get<std::vector<std::string>>();
    ep.test = doc.at("test").get<std::vector<std::string>>();
    ep.val = doc.at("val").get<std::vector<std::string>>();
    return ep;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidManifest, std::string("malformed episode: ") + e.what());
  }
}

void save_episode(const std::filesystem::path& path, const Episode& episode) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << episode_to_json(episode);
}

Episode load_episode(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return episode_from_json(buf.str());
}

}  // namespace oboi
