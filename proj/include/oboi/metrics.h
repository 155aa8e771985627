#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oboi/dataset.h"
#include "oboi/episode.h"
#include "oboi/instance_bag.h"

namespace oboi {

enum class Split { kTest, kVal };
std::string_view to_string(Split split);
Split parse_split(std::string_view text);

// A query already reduced to the bag's embedding space. Indices refer to the
// bag's label space.
struct Query {
  std::string sample_id;
  std::size_t truth = kNoIndex;
  std::size_t predicted_object = kNoIndex;
  Embedding embedding;
};

struct Prediction {
  std::string sample_id;
  std::size_t truth = kNoIndex;
  std::size_t predicted = kNoIndex;
  std::size_t predicted_object = kNoIndex;
  std::optional<std::size_t> conditioned_on;
};

struct MetricsReport {
  // Percentages in [0, 100].
  double acc_i = 0.0;  // macro over instances with at least one query
  std::vector<std::pair<std::string, double>> acc_o;             // object declaration order
  std::vector<std::pair<std::string, double>> per_instance_acc;  // instance declaration order
  std::vector<std::string> labels;                       // confusion axes, all instances
  std::vector<std::string> label_objects;                // f(label), parallel to labels
  std::vector<std::vector<std::size_t>> confusion;       // [truth][predicted]
  std::size_t queries = 0;
  std::size_t correct = 0;

  // Config echo.
  ReductionConfig reduction;
  HeadConfig head;
  std::optional<Episode> episode;  // support/test/val ids are not echoed
  std::optional<Split> split;

  std::vector<Prediction> predictions;  // query order; not serialized

  double micro_acc() const { return queries ? 100.0 * static_cast<double>(correct) / static_cast<double>(queries) : 0.0; }
};

// Classifies every query (in parallel) and aggregates in query order, so the
// report does not depend on `threads`. Throws kEmptySplit on no queries.
MetricsReport evaluate_queries(const InstanceBag& bag, std::span<const Query> queries,
                               std::size_t threads = 1);

// Embeds the given samples with `config`, reading tensors in parallel.
std::vector<Embedding> embed_samples(const Dataset& dataset, std::span<const std::size_t> samples,
                                     const ReductionConfig& config, std::size_t threads = 1);

// Support embeddings of an episode paired with their instance ids.
std::vector<std::pair<std::string, Embedding>> support_embeddings(const Dataset& dataset,
                                                                  const Episode& episode,
                                                                  const ReductionConfig& config,
                                                                  std::size_t threads = 1);

// Builds the queries for one split of an episode, mapping labels into the
// bag's label space.
std::vector<Query> split_queries(const InstanceBag& bag, const Episode& episode, const Dataset& dataset,
                                 Split split, std::size_t threads = 1);

MetricsReport evaluate(const InstanceBag& bag, const Episode& episode, const Dataset& dataset,
                       Split split, std::size_t threads = 1);

// 100 * (acc_2 - acc_1) / acc_1. Throws kUndefinedGain when acc_1 == 0.
double relative_gain(double acc_1, double acc_2);

// Sorted keys, numbers rounded to 6 significant digits.
std::string report_to_json(const MetricsReport& report);
// Aligned text table, percentages to 2 decimals.
std::string report_to_table(const MetricsReport& report);

}  // namespace oboi
