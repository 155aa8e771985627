#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oboi/dataset.h"

namespace oboi {

enum class Protocol { k1SAS, k1S1S, kKShot };

std::string_view to_string(Protocol protocol);
Protocol parse_protocol(std::string_view text);  // "1sas", "1s1s", "kshot"

// Support/test/val sample ids, each list in manifest order.
struct Episode {
  Protocol protocol = Protocol::k1SAS;
  std::size_t shots = 1;
  std::uint64_t seed = 0;
  // Instances per object kept by select_instances(), when applied.
  std::optional<std::size_t> instances_per_object;
  std::vector<std::string> support;
  std::vector<std::string> test;
  std::vector<std::string> val;

  bool operator==(const Episode&) const = default;
};

// One uniformly drawn sample per (instance, sequence); the remaining samples
// of each instance go ceil(80%) to test and the rest to val.
// Throws kIncompleteCoverage(instance, sequence).
Episode split_1sas(const Dataset& dataset, std::uint64_t seed);
// One sample per instance from the first sequence; remainder as above.
Episode split_1s1s(const Dataset& dataset, std::uint64_t seed);
// k samples per (instance, sequence) drawn without replacement.
Episode split_kshot(const Dataset& dataset, std::size_t k, std::uint64_t seed);

Episode make_episode(const Dataset& dataset, Protocol protocol, std::size_t shots, std::uint64_t seed);

// Keeps the first p instances of every object in declaration order.
// Throws kNotEnoughInstances(object).
Dataset select_instances(const Dataset& dataset, std::size_t p);

// Uniformly down-samples every (instance, sequence) cell to the smallest cell
// count, keeping manifest order. Throws kIncompleteCoverage on an empty cell.
Dataset balance_dataset(const Dataset& dataset, std::uint64_t seed);

std::string episode_to_json(const Episode& episode);
Episode episode_from_json(std::string_view text);
void save_episode(const std::filesystem::path& path, const Episode& episode);
Episode load_episode(const std::filesystem::path& path);

}  // namespace oboi
