#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "oboi/error.h"
#include "oboi/metrics.h"
#include "test_util.h"

using namespace oboi;
using oboi::testing::error_of;

namespace {

// p instances per object, one-dimensional prototypes at 10 * instance index.
InstanceBag line_bag(std::size_t objects, std::size_t p) {
  std::vector<std::string> objs, inst, owners;
  std::vector<std::pair<std::string, Embedding>> support;
  for (std::size_t o = 0; o < objects; ++o) {
    objs.push_back("o" + std::to_string(o));
    for (std::size_t j = 0; j < p; ++j) {
      inst.push_back(objs.back() + "_" + std::to_string(j));
      owners.push_back(objs.back());
      support.emplace_back(inst.back(), Embedding{10.0 * static_cast<double>(inst.size() - 1)});
    }
  }
  ReductionConfig r;
  r.mode = ReductionMode::kEe;
  return build_bag(support, LabelSpace(objs, inst, owners), r, HeadConfig{});
}

Query query_at(const InstanceBag& bag, std::size_t truth, double x) {
  return Query{"q" + std::to_string(truth) + "_" + std::to_string(x), truth,
               bag.label_space().object_index_of(truth), Embedding{x}};
}

}  // namespace

TEST_CASE("perfect classifier") {
  auto bag = line_bag(3, 2);
  std::vector<Query> qs;
  for (std::size_t i = 0; i < 6; ++i) {
    for (int k = 0; k < 3; ++k) qs.push_back(query_at(bag, i, 10.0 * static_cast<double>(i) + k));
  }
  auto r = evaluate_queries(bag, qs);
  CHECK(r.acc_i == 100.0);
  CHECK(r.acc_o.size() == 3);
  for (const auto& [o, a] : r.acc_o) CHECK(a == 100.0);
  CHECK(r.micro_acc() == 100.0);
}

TEST_CASE("constant classifier on p=2 balanced data gives 50") {
  auto bag = line_bag(4, 2);
  std::vector<Query> qs;
  // Every query sits on the first instance of its object.
  for (std::size_t i = 0; i < 8; ++i) {
    const std::size_t first = i - i % 2;
    for (int k = 0; k < 5; ++k) qs.push_back(query_at(bag, i, 10.0 * static_cast<double>(first)));
  }
  auto r = evaluate_queries(bag, qs);
  CHECK(r.acc_i == 50.0);
  for (const auto& [o, a] : r.acc_o) CHECK(a == 50.0);
}

TEST_CASE("macro and micro accuracy") {
  auto bag = line_bag(2, 2);
  SUBCASE("imbalanced counts: macro over instances") {
    std::vector<Query> qs;
    for (int k = 0; k < 9; ++k) qs.push_back(query_at(bag, 0, 0));   // 9/9 right
    qs.push_back(query_at(bag, 1, 0));                                // 0/1 right
    auto r = evaluate_queries(bag, qs);
    CHECK(r.acc_i == 50.0);
    CHECK(r.micro_acc() == 90.0);
    CHECK(r.per_instance_acc.size() == 2);
    REQUIRE(r.acc_o.size() == 1);
    CHECK(r.acc_o[0].first == "o0");
  }
  SUBCASE("balanced counts: macro equals micro exactly, confusion consistent") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> pos(-5, 35);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Query> qs;
      const int per = 1 + static_cast<int>(gen() % 6);
      for (std::size_t i = 0; i < 4; ++i) {
        for (int k = 0; k < per; ++k) qs.push_back(query_at(bag, i, pos(gen)));
      }
      auto r = evaluate_queries(bag, qs);
      CHECK(std::abs(r.acc_i - r.micro_acc()) <= 1e-9);
      std::size_t trace = 0, total = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        std::size_t row = 0;
        for (auto c : r.confusion[i]) row += c;
        CHECK(row == static_cast<std::size_t>(per));
        trace += r.confusion[i][i];
        total += row;
      }
      CHECK(100.0 * static_cast<double>(trace) / static_cast<double>(total) == r.micro_acc());
      CHECK(r.acc_i >= 0.0);
      CHECK(r.acc_i <= 100.0);
    }
  }
  SUBCASE("acc_i is not the mean of acc_o when objects differ in size") {
    std::vector<std::string> objs{"a", "b"}, inst{"a1", "a2", "a3", "b1"}, owners{"a", "a", "a", "b"};
    std::vector<std::pair<std::string, Embedding>> s{{"a1", {0}}, {"a2", {10}}, {"a3", {20}}, {"b1", {30}}};
    ReductionConfig red;
    red.mode = ReductionMode::kEe;
    auto b = build_bag(s, LabelSpace(objs, inst, owners), red, HeadConfig{});
    std::vector<Query> qs{{"x", 0, 0, {0}}, {"y", 1, 0, {0}}, {"z", 2, 0, {0}}, {"w", 3, 1, {30}}};
    auto r = evaluate_queries(b, qs);
    CHECK(std::abs(r.acc_i - 50.0) <= 1e-12);
    CHECK(std::abs(r.acc_o[0].second - 100.0 / 3.0) <= 1e-12);
    CHECK(r.acc_o[1].second == 100.0);
  }
}

TEST_CASE("evaluate_queries is independent of the thread count") {
  auto bag = line_bag(3, 3);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> pos(-5, 85);
  std::vector<Query> qs;
  for (int k = 0; k < 2000; ++k) qs.push_back(query_at(bag, gen() % 9, pos(gen)));
  auto one = evaluate_queries(bag, qs, 1);
  for (std::size_t t : {2u, 3u, 8u}) {
    auto many = evaluate_queries(bag, qs, t);
    CHECK(report_to_json(many) == report_to_json(one));
    CHECK(many.confusion == one.confusion);
  }
}

TEST_CASE("EmptySplit") {
  auto bag = line_bag(1, 2);
  std::vector<Query> none;
  CHECK(error_of([&] { evaluate_queries(bag, none); }) == ErrorCode::kEmptySplit);
}

TEST_CASE("relative_gain") {
  CHECK(std::round(relative_gain(68.84, 76.34) * 10) / 10 == doctest::Approx(10.9));
  CHECK(std::round(relative_gain(68.84, 77.08) * 10) / 10 == doctest::Approx(12.0));
  CHECK(relative_gain(42.0, 42.0) == 0.0);
  CHECK(relative_gain(50.0, 40.0) < 0.0);
  double prev = relative_gain(30.0, 0.0);
  for (double a2 = 1.0; a2 <= 100.0; a2 += 1.0) {
    const double g = relative_gain(30.0, a2);
    CHECK(g > prev);
    prev = g;
  }
  CHECK(error_of([] { relative_gain(0.0, 10.0); }) == ErrorCode::kUndefinedGain);
}

TEST_CASE("report output") {
  auto bag = line_bag(2, 2);
  std::vector<Query> qs{query_at(bag, 0, 0), query_at(bag, 1, 0), query_at(bag, 2, 20), query_at(bag, 3, 30.2)};
  auto r = evaluate_queries(bag, qs);
  r.split = Split::kTest;
  const auto text = report_to_json(r);
  auto doc = nlohmann::json::parse(text);
  CHECK(doc["format"] == "oboi-report");
  CHECK(doc["acc_i"] == 75.0);
  CHECK(doc["confusion"]["matrix"][1][0] == 1);
  CHECK(doc["per_instance_acc"]["o0_1"] == 0.0);
  CHECK(doc["acc_o"]["o1"] == 100.0);
  CHECK(doc["config"]["split"] == "test");
  CHECK(report_to_json(r) == text);

  r.acc_i = 100.0 / 3.0;
  CHECK(nlohmann::json::parse(report_to_json(r))["acc_i"].get<double>() == 33.3333);

  const auto table = report_to_table(r);
  CHECK(table.find("33.33") != std::string::npos);
  CHECK(table.find("o1_1") != std::string::npos);
}
