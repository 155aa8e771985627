#include "oboi/metrics.h"

#include <cstdio>
#include <sstream>

#include "json_util.h"
#include "oboi/error.h"
#include "oboi/parallel.h"

namespace oboi {
namespace {

using nlohmann::json;

std::vector<std::size_t> resolve_ids(const Dataset& ds, const std::vector<std::string>& ids) {
  auto lookup = ds.sample_lookup();
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = lookup.find(id);
    if (it == lookup.end()) {
      throw Error(ErrorCode::kInvalidManifest, "episode references unknown sample '" + id + "'");
    }
    out.push_back(it->second);
  }
  return out;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string_view to_string(Split split) { return split == Split::kTest ? "test" : "val"; }

Split parse_split(std::string_view text) {
  if (text == "test") return Split::kTest;
  if (text == "val") return Split::kVal;
  throw Error(ErrorCode::kInvalidConfig, "unknown split '" + std::string(text) + "'");
}

MetricsReport evaluate_queries(const InstanceBag& bag, std::span<const Query> queries, std::size_t threads) {
  if (queries.empty()) throw Error(ErrorCode::kEmptySplit, "no samples to evaluate");
  const LabelSpace& ls = bag.label_space();
  const std::size_t n_inst = ls.num_instances();

  std::vector<Prediction> preds(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t k) {
    const Query& q = queries[k];
    if (q.truth >= n_inst) {
      throw Error(ErrorCode::kUnknownInstance, "query '" + q.sample_id + "' has no instance in the bag's label space");
    }
    Classification c = bag.classify(q.embedding, q.predicted_object);
    preds[k] = Prediction{q.sample_id, q.truth, c.predicted, q.predicted_object, c.conditioned_on};
  });

  MetricsReport r;
  r.reduction = bag.reduction_config();
  r.head = bag.head_config();
  r.labels = ls.instance_classes();
  r.label_objects = ls.instance_objects();
  r.confusion.assign(n_inst, std::vector<std::size_t>(n_inst, 0));
  std::vector<std::size_t> totals(n_inst, 0), hits(n_inst, 0);
  for (const auto& p : preds) {
    ++r.confusion[p.truth][p.predicted];
    ++totals[p.truth];
    if (p.truth == p.predicted) {
      ++hits[p.truth];
      ++r.correct;
    }
  }
  r.queries = preds.size();

  std::vector<double> per(n_inst, 0.0);
  double sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t i = 0; i < n_inst; ++i) {
    if (totals[i] == 0) continue;
    per[i] = 100.0 * static_cast<double>(hits[i]) / static_cast<double>(totals[i]);
    r.per_instance_acc.emplace_back(ls.instance_classes()[i], per[i]);
    sum += per[i];
    ++scored;
  }
  r.acc_i = sum / static_cast<double>(scored);
  for (std::size_t o = 0; o < ls.num_objects(); ++o) {
    double s = 0.0;
    std::size_t n = 0;
    for (auto i : ls.instances_of(o)) {
      if (totals[i] == 0) continue;
      s += per[i];
      ++n;
    }
    if (n > 0) r.acc_o.emplace_back(ls.object_classes()[o], s / static_cast<double>(n));
  }
  r.predictions = std::move(preds);
  return r;
}

std::vector<Embedding> embed_samples(const Dataset& dataset, std::span<const std::size_t> samples,
                                     const ReductionConfig& config, std::size_t threads) {
  check_reduction_config(config);
  std::vector<Embedding> out(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t k) {
    const Sample& s = dataset.samples[samples[k]];
    if (config.mode == ReductionMode::kLogits) {
      auto logits = load_logits(dataset, s);
      out[k] = reduce(FeatureMap{}, Mask{}, config, std::span<const float>(logits));
    } else {
      out[k] = embed_sample(s, load_feature_map(dataset, s), config);
    }
  });
  return out;
}

std::vector<std::pair<std::string, Embedding>> support_embeddings(const Dataset& dataset,
                                                                  const Episode& episode,
                                                                  const ReductionConfig& config,
                                                                  std::size_t threads) {
  auto idx = resolve_ids(dataset, episode.support);
  auto emb = embed_samples(dataset, idx, config, threads);
  std::vector<std::pair<std::string, Embedding>> out;
  out.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.emplace_back(dataset.samples[idx[k]].instance_label, std::move(emb[k]));
  }
  return out;
}

std::vector<Query> split_queries(const InstanceBag& bag, const Episode& episode, const Dataset& dataset,
                                 Split split, std::size_t threads) {
  const auto& ids = split == Split::kTest ? episode.test : episode.val;
  auto idx = resolve_ids(dataset, ids);
  auto emb = embed_samples(dataset, idx, bag.reduction_config(), threads);
  const LabelSpace& ls = bag.label_space();
  std::vector<Query> queries(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Sample& s = dataset.samples[idx[k]];
    Query& q = queries[k];
    q.sample_id = s.sample_id;
    q.truth = ls.instance_index(s.instance_label).value_or(kNoIndex);
    q.predicted_object = ls.object_index(s.predicted_object).value_or(kNoIndex);
    if (bag.head_config().conditioned && q.predicted_object == kNoIndex) {
      throw Error(ErrorCode::kUnknownObject, "sample '" + s.sample_id + "' predicts unknown object '" +
                                                 s.predicted_object + "'");
    }
    q.embedding = std::move(emb[k]);
  }
  return queries;
}

MetricsReport evaluate(const InstanceBag& bag, const Episode& episode, const Dataset& dataset, Split split,
                       std::size_t threads) {
  auto queries = split_queries(bag, episode, dataset, split, threads);
  MetricsReport r = evaluate_queries(bag, queries, threads);
  r.episode = episode;
  r.split = split;
  return r;
}

double relative_gain(double acc_1, double acc_2) {
  if (acc_1 == 0.0) throw Error(ErrorCode::kUndefinedGain, "relative gain against zero accuracy");
  return 100.0 * (acc_2 - acc_1) / acc_1;
}

std::string report_to_json(const MetricsReport& r) {
  using detail::round6;
  json acc_o = json::object();
  for (const auto& [o, v] : r.acc_o) acc_o[o] = round6(v);
  json per = json::object();
  for (const auto& [i, v] : r.per_instance_acc) per[i] = round6(v);
  json config = {
      {"reduction",
       {{"mode", std::string(to_string(r.reduction.mode))},
        {"order", r.reduction.mode == ReductionMode::kAee ? r.reduction.order : r.reduction.blocks()},
        {"standardize", r.reduction.standardize},
        {"use_mask", r.reduction.use_mask}}},
      {"head",
       {{"head", std::string(to_string(r.head.head))},
        {"transform", std::string(to_string(r.head.effective_transform()))},
        {"conditioned", r.head.conditioned},
        {"fallback_unconditioned", r.head.fallback_unconditioned}}},
  };
  if (r.episode) {
    config["protocol"] = std::string(to_string(r.episode->protocol));
    config["shots"] = r.episode->shots;
    config["seed"] = r.episode->seed;
    config["instances_per_object"] =
        r.episode->instances_per_object ? json(*r.episode->instances_per_object) : json(nullptr);
  }
  if (r.split) config["split"] = std::string(to_string(*r.split));
  json doc = {{"format", "oboi-report"},
              {"version", 1},
              {"acc_i", round6(r.acc_i)},
              {"acc_o", acc_o},
              {"per_instance_acc", per},
              {"micro_acc", round6(r.micro_acc())},
              {"queries", r.queries},
              {"correct", r.correct},
              {"confusion", {{"labels", r.labels}, {"matrix", r.confusion}}},
              {"config", config}};
  return doc.dump(2) + "\n";
}

std::string report_to_table(const MetricsReport& r) {
  std::size_t width = 8;
  for (const auto& [name, v] : r.acc_o) width = std::max(width, name.size());
  for (const auto& [name, v] : r.per_instance_acc) width = std::max(width, name.size() + 2);
  std::ostringstream out;
  auto row = [&](const std::string& name, double v) {
    std::string num = fixed2(v);
    out << name << std::string(width + 2 - name.size(), ' ')
        << std::string(num.size() < 6 ? 6 - num.size() : 0, ' ') << num << '\n';
  };
  out << "mode=" << to_string(r.reduction.mode);
  if (r.reduction.mode == ReductionMode::kAee) out << " R=" << r.reduction.order;
  out << " head=" << to_string(r.head.head) << " transform=" << to_string(r.head.effective_transform())
      << " conditioned=" << (r.head.conditioned ? "yes" : "no")
      << " mask=" << (r.reduction.use_mask ? "yes" : "no");
  if (r.episode) out << " protocol=" << to_string(r.episode->protocol) << " seed=" << r.episode->seed;
  if (r.split) out << " split=" << to_string(*r.split);
  out << '\n' << std::string(width + 8, '-') << '\n';
  row("Acc_i", r.acc_i);
  row("micro", r.micro_acc());
  out << std::string(width + 8, '-') << '\n';
  for (const auto& [obj, v] : r.acc_o) {
    row(obj, v);
    for (const auto& [inst, iv] : r.per_instance_acc) {
      for (std::size_t i = 0; i < r.labels.size(); ++i) {
        if (r.labels[i] == inst && r.label_objects[i] == obj) row("  " + inst, iv);
      }
    }
  }
  return out.str();
}

}  // namespace oboi
