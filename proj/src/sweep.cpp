#include "oboi/sweep.h"

#include <cstdio>
#include <algorithm>
#include <map>
#include <sstream>

#include "oboi/error.h"

namespace oboi {
namespace {

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fixed(double v, int digits, bool sign = false) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), sign ? "%+.*f" : "%.*f", digits, v);
  return buf;
}

ReductionConfig reduction_for(const SweepSpec& spec, int order) {
  ReductionConfig r;
  r.mode = order == 1 ? ReductionMode::kEe : ReductionMode::kAee;
  r.order = order;
  r.standardize = spec.standardize;
  r.use_mask = spec.use_mask;
  check_reduction_config(r);
  return r;
}

std::string label(const SweepCell& c) {
  std::string s = std::string(to_string(c.head)) + (c.order == 1 ? " EE" : " AEE R=" + std::to_string(c.order));
  return s;
}

}  // namespace

std::vector<SweepCell> run_sweep(const Dataset& dataset, const SweepSpec& spec, std::size_t threads) {
  if (spec.protocol != Protocol::kKShot) {
    for (auto k : spec.shots) {
      if (k != 1) throw Error(ErrorCode::kInvalidConfig, "shots other than 1 require protocol kshot");
    }
  }
  if (spec.shots.empty() || spec.orders.empty() || spec.heads.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "sweep grid is empty");
  }
  std::vector<std::optional<std::size_t>> ps;
  if (spec.instances_per_object.empty()) ps.push_back(std::nullopt);
  for (auto p : spec.instances_per_object) ps.push_back(p);

  std::vector<SweepCell> cells;
  for (const auto& p : ps) {
    const Dataset subset = p ? select_instances(dataset, *p) : dataset;
    for (auto k : spec.shots) {
      Episode ep = make_episode(subset, spec.protocol, k, spec.seed);
      ep.instances_per_object = p;
      for (int order : spec.orders) {
        const ReductionConfig red = reduction_for(spec, order);
        auto support = support_embeddings(subset, ep, red, threads);
        std::vector<Query> queries;
        for (HeadKind head : spec.heads) {
          HeadConfig hc;
          hc.head = head;
          hc.simpleshot_transform = spec.transform;
          hc.conditioned = spec.conditioned;
          hc.fallback_unconditioned = spec.fallback_unconditioned;
          InstanceBag bag = build_bag(support, subset.label_space, red, hc);
          // Queries only depend on the reduction, so embed them once per R.
          if (queries.empty()) queries = split_queries(bag, ep, subset, spec.split, threads);
          SweepCell cell;
          cell.instances_per_object = p;
          cell.shots = k;
          cell.head = head;
          cell.order = order;
          cell.report = evaluate_queries(bag, queries, threads);
          cell.report.episode = ep;
          cell.report.split = spec.split;
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  for (auto& c : cells) {
    for (const auto& b : cells) {
      if (b.instances_per_object == c.instances_per_object && b.shots == c.shots && b.head == c.head &&
          b.order == spec.baseline_order) {
        c.baseline_acc_i = b.report.acc_i;
        if (b.report.acc_i > 0) c.delta = relative_gain(b.report.acc_i, c.report.acc_i);
      }
    }
  }
  return cells;
}

std::string sweep_cell_name(const SweepCell& c) {
  std::string name = "report";
  if (c.instances_per_object) name += "_p" + std::to_string(*c.instances_per_object);
  name += "_k" + std::to_string(c.shots) + "_" + std::string(to_string(c.head)) + "_R" + std::to_string(c.order);
  return name;
}

std::string sweep_to_csv(const SweepSpec& spec, const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out << "protocol,p,shots,head,transform,mode,R,acc_i,micro_acc,baseline_acc_i,delta\n";
  for (const auto& c : cells) {
    out << to_string(spec.protocol) << ',' << (c.instances_per_object ? std::to_string(*c.instances_per_object) : "")
        << ',' << c.shots << ',' << to_string(c.head) << ',' << to_string(c.report.head.effective_transform())
        << ',' << to_string(c.report.reduction.mode) << ',' << c.order << ',' << g6(c.report.acc_i) << ','
        << g6(c.report.micro_acc()) << ',' << (c.baseline_acc_i ? g6(*c.baseline_acc_i) : "") << ','
        << (c.delta ? g6(*c.delta) : "") << '\n';
  }
  return out.str();
}

std::string sweep_to_table(const SweepSpec& spec, const std::vector<SweepCell>& cells) {
  // Column per p, row per (head, R, shots) in first-seen order.
  std::vector<std::optional<std::size_t>> columns;
  std::vector<std::string> rows;
  std::map<std::pair<std::string, std::optional<std::size_t>>, const SweepCell*> grid;
  for (const auto& c : cells) {
    if (std::find(columns.begin(), columns.end(), c.instances_per_object) == columns.end()) {
      columns.push_back(c.instances_per_object);
    }
    std::string row = label(c) + (spec.shots.size() > 1 ? " k=" + std::to_string(c.shots) : "");
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    grid[{row, c.instances_per_object}] = &c;
  }
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.size());
  std::ostringstream out;
  out << "Acc_i (" << to_string(spec.protocol) << ", split " << to_string(spec.split) << ")\n";
  out << std::string(width, ' ');
  for (const auto& p : columns) {
    std::string h = p ? "p=" + std::to_string(*p) : "all";
    out << std::string(9 - std::min<std::size_t>(9, h.size()), ' ') << h;
  }
  out << '\n';
  for (const auto& r : rows) {
    out << r << std::string(width - r.size(), ' ');
    const SweepCell* any = nullptr;
    for (const auto& p : columns) {
      auto it = grid.find({r, p});
      std::string v = it == grid.end() ? "-" : fixed(it->second->report.acc_i, 2);
      if (it != grid.end()) any = it->second;
      out << std::string(9 - std::min<std::size_t>(9, v.size()), ' ') << v;
    }
    out << '\n';
    if (any && any->order != spec.baseline_order) {
      std::string d = "  delta";
      out << d << std::string(width - std::min(width, d.size()), ' ');
      for (const auto& p : columns) {
        auto it = grid.find({r, p});
        std::string v = (it == grid.end() || !it->second->delta) ? "-" : fixed(*it->second->delta, 1, true);
        out << std::string(9 - std::min<std::size_t>(9, v.size()), ' ') << v;
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace oboi
