#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "oboi/episode.h"
#include "oboi/error.h"
#include "oboi/rng.h"
#include "test_util.h"

using namespace oboi;
using oboi::testing::error_of;
using oboi::testing::make_layout;

namespace {

std::map<std::string, const Sample*> by_id(const Dataset& ds) {
  std::map<std::string, const Sample*> m;
  for (const auto& s : ds.samples) m[s.sample_id] = &s;
  return m;
}

// support/test/val are disjoint, each in manifest order, and together cover
// every sample exactly once. Test gets ceil(0.8 n) of each instance's rest.
void check_partition(const Dataset& ds, const Episode& ep) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t k = 0; k < ds.samples.size(); ++k) pos[ds.samples[k].sample_id] = k;
  auto ordered = [&](const std::vector<std::string>& ids) {
    for (std::size_t k = 1; k < ids.size(); ++k) {
      if (pos.at(ids[k - 1]) >= pos.at(ids[k])) return false;
    }
    return true;
  };
  CHECK(ordered(ep.support));
  CHECK(ordered(ep.test));
  CHECK(ordered(ep.val));
  std::multiset<std::string> all(ep.support.begin(), ep.support.end());
  all.insert(ep.test.begin(), ep.test.end());
  all.insert(ep.val.begin(), ep.val.end());
  CHECK(all.size() == ds.samples.size());
  CHECK(std::set<std::string>(all.begin(), all.end()).size() == ds.samples.size());

  auto samples = by_id(ds);
  std::map<std::string, std::size_t> n_test, n_val;
  for (const auto& id : ep.test) ++n_test[samples.at(id)->instance_label];
  for (const auto& id : ep.val) ++n_val[samples.at(id)->instance_label];
  for (const auto& inst : ds.label_space.instance_classes()) {
    const std::size_t rest = n_test[inst] + n_val[inst];
    CHECK(n_test[inst] == (4 * rest + 4) / 5);
  }
}

}  // namespace

TEST_CASE("Rng reference stream") {
  Rng a(0);
  CHECK(a.next() == 0x99ec5f36cb75f2b4ULL);
  CHECK(a.next() == 0xbf6e1f784956452aULL);
  CHECK(a.next() == 0x1a5f849d4933e6e0ULL);

  Rng b(42);
  std::vector<std::uint64_t> draws;
  for (int k = 0; k < 10; ++k) draws.push_back(b.below(10));
  CHECK(draws == std::vector<std::uint64_t>{0, 3, 6, 9, 9, 7, 7, 8, 7, 5});

  Rng c(7);
  CHECK(c.uniform() == 0.7005764821796896);
  CHECK(c.uniform() == 0.2787512294737843);
}

TEST_CASE("split_1sas") {
  SUBCASE("45 instances x 11 sequences gives 495 support samples") {
    auto ds = make_layout(9, 5, 11, 4);
    auto ep = split_1sas(ds, 1);
    CHECK(ep.support.size() == 495);
    auto samples = by_id(ds);
    std::set<std::pair<std::string, std::string>> cells;
    for (const auto& id : ep.support) cells.emplace(samples.at(id)->instance_label, samples.at(id)->sequence_id);
    CHECK(cells.size() == 495);
    check_partition(ds, ep);
  }
  SUBCASE("deterministic under a seed, varies across seeds") {
    auto ds = make_layout(3, 2, 4, 10);
    CHECK(split_1sas(ds, 9) == split_1sas(ds, 9));
    CHECK_FALSE(split_1sas(ds, 9) == split_1sas(ds, 10));
  }
  SUBCASE("with one sequence 1SAS and 1S1S coincide") {
    auto ds = make_layout(3, 3, 1, 7);
    for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
      auto a = split_1sas(ds, seed);
      auto b = split_1s1s(ds, seed);
      CHECK(a.support == b.support);
      CHECK(a.test == b.test);
      CHECK(a.val == b.val);
    }
  }
  SUBCASE("missing cell") {
    auto ds = make_layout(2, 2, 3, 2);
    std::erase_if(ds.samples, [](const Sample& s) { return s.instance_label == "o1_2" && s.sequence_id == "s2"; });
    CHECK(error_of([&] { split_1sas(ds, 0); }) == ErrorCode::kIncompleteCoverage);
    CHECK_NOTHROW(split_1s1s(ds, 0));
  }
}

TEST_CASE("split_1s1s") {
  auto ds = make_layout(9, 2, 5, 6);
  auto ep = split_1s1s(ds, 3);
  CHECK(ep.support.size() == 18);
  auto samples = by_id(ds);
  std::set<std::string> instances;
  for (const auto& id : ep.support) {
    CHECK(samples.at(id)->sequence_id == "s0");
    instances.insert(samples.at(id)->instance_label);
  }
  CHECK(instances.size() == 18);
  check_partition(ds, ep);
}

TEST_CASE("split_kshot") {
  auto ds = make_layout(2, 3, 3, 6);
  for (std::size_t k : {1u, 2u, 6u}) {
    auto ep = split_kshot(ds, k, 11);
    CHECK(ep.support.size() == 6 * 3 * k);
    CHECK(ep.shots == k);
    check_partition(ds, ep);
  }
  CHECK(split_kshot(ds, 1, 5).support == split_1sas(ds, 5).support);
  CHECK(error_of([&] { split_kshot(ds, 7, 0); }) == ErrorCode::kIncompleteCoverage);
  CHECK(error_of([&] { split_kshot(ds, 0, 0); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("80/20 rounding goes up") {
  // Rest sizes 1..12 per instance (one sequence, one support each).
  for (std::size_t per_cell = 2; per_cell <= 13; ++per_cell) {
    auto ds = make_layout(1, 2, 1, per_cell);
    auto ep = split_1sas(ds, per_cell);
    const std::size_t rest = per_cell - 1;
    CHECK(ep.test.size() == 2 * ((4 * rest + 4) / 5));
    CHECK(ep.val.size() == 2 * (rest - (4 * rest + 4) / 5));
  }
  auto five = split_1sas(make_layout(1, 1, 1, 6), 0);
  CHECK(five.test.size() == 4);
  CHECK(five.val.size() == 1);
  auto one = split_1sas(make_layout(1, 1, 1, 2), 0);
  CHECK(one.test.size() == 1);
  CHECK(one.val.empty());
}

TEST_CASE("split properties over random layouts") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng r(seed + 1000);
    auto ds = make_layout(1 + r.below(4), 1 + r.below(4), 1 + r.below(5), 1 + r.below(8));
    // Drop some samples so cell sizes differ, keeping at least one per cell.
    std::map<std::pair<std::string, std::string>, int> kept;
    std::erase_if(ds.samples, [&](const Sample& s) {
      auto& n = kept[{s.instance_label, s.sequence_id}];
      if (n > 0 && r.below(3) == 0) return true;
      ++n;
      return false;
    });
    for (Protocol p : {Protocol::k1SAS, Protocol::k1S1S, Protocol::kKShot}) {
      auto ep = make_episode(ds, p, 1, seed);
      CHECK(ep == make_episode(ds, p, 1, seed));
      check_partition(ds, ep);
      auto samples = by_id(ds);
      std::set<std::string> covered;
      for (const auto& id : ep.support) covered.insert(samples.at(id)->instance_label);
      CHECK(covered.size() == ds.label_space.num_instances());
    }
  }
}

TEST_CASE("select_instances") {
  auto ds = make_layout(9, 5, 2, 2);
  auto p2 = select_instances(ds, 2);
  CHECK(p2.label_space.num_instances() == 18);
  CHECK(p2.label_space.num_objects() == 9);
  CHECK(p2.label_space.instance_classes()[0] == "o0_1");
  CHECK(p2.label_space.instance_classes()[1] == "o0_2");
  CHECK(p2.samples.size() == 18 * 2 * 2);
  for (const auto& s : p2.samples) CHECK(p2.label_space.instance_index(s.instance_label));

  auto p5 = select_instances(ds, 5);
  CHECK(p5.label_space == ds.label_space);
  CHECK(p5.samples.size() == ds.samples.size());

  auto p3 = select_instances(ds, 3);
  for (const auto& inst : p2.label_space.instance_classes()) CHECK(p3.label_space.instance_index(inst));

  CHECK(error_of([&] { select_instances(ds, 6); }) == ErrorCode::kNotEnoughInstances);
}

TEST_CASE("balance_dataset") {
  auto ds = make_layout(2, 2, 3, 5);
  std::size_t dropped = 0;
  std::erase_if(ds.samples, [&](const Sample& s) {
    return s.instance_label == "o0_1" && s.sequence_id == "s1" && dropped++ < 3;
  });
  auto bal = balance_dataset(ds, 4);
  CHECK(bal.samples.size() == 4 * 3 * 2);
  std::map<std::pair<std::string, std::string>, int> counts;
  for (const auto& s : bal.samples) ++counts[{s.instance_label, s.sequence_id}];
  for (const auto& [cell, n] : counts) CHECK(n == 2);
  CHECK(balance_dataset(ds, 4).samples.size() == bal.samples.size());

  std::erase_if(ds.samples, [](const Sample& s) { return s.instance_label == "o1_1" && s.sequence_id == "s0"; });
  CHECK(error_of([&] { balance_dataset(ds, 0); }) == ErrorCode::kIncompleteCoverage);
}

TEST_CASE("episode JSON round trip") {
  auto ds = make_layout(2, 2, 2, 4);
  auto ep = split_kshot(ds, 2, 99);
  ep.instances_per_object = 2;
  auto text = episode_to_json(ep);
  CHECK(episode_from_json(text) == ep);
  CHECK(episode_to_json(episode_from_json(text)) == text);
  CHECK(error_of([] { episode_from_json("{\"format\":\"other\"}"); }) == ErrorCode::kInvalidManifest);
}
