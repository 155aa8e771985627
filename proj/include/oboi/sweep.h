#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oboi/dataset.h"
#include "oboi/episode.h"
#include "oboi/metrics.h"

namespace oboi {

// Experiment grid: every (p, shots) pair gets one episode, shared by all
// (head, R) cells. R = 1 runs the plain masked-mean embedding (ee).
struct SweepSpec {
  Protocol protocol = Protocol::k1SAS;
  std::vector<std::size_t> instances_per_object;  // empty: keep the dataset as is
  std::vector<std::size_t> shots{1};
  std::vector<int> orders{1, 4};
  std::vector<HeadKind> heads{HeadKind::kProtoNet};
  TransformKind transform = TransformKind::kCL2N;
  bool standardize = false;
  bool use_mask = true;
  bool conditioned = true;
  bool fallback_unconditioned = false;
  int baseline_order = 1;  // Δ is taken against this R within the same (p, shots, head)
  std::uint64_t seed = 0;
  Split split = Split::kTest;
};

struct SweepCell {
  std::optional<std::size_t> instances_per_object;
  std::size_t shots = 1;
  HeadKind head = HeadKind::kProtoNet;
  int order = 1;
  MetricsReport report;
  std::optional<double> baseline_acc_i;
  std::optional<double> delta;
};

// Throws kInvalidConfig for shots != 1 under 1sas/1s1s.
std::vector<SweepCell> run_sweep(const Dataset& dataset, const SweepSpec& spec, std::size_t threads = 1);

std::string sweep_cell_name(const SweepCell& cell);
std::string sweep_to_csv(const SweepSpec& spec, const std::vector<SweepCell>& cells);
// Acc_i grid: one row per (head, R, shots), one column per p, Δ rows under
// each non-baseline R.
std::string sweep_to_table(const SweepSpec& spec, const std::vector<SweepCell>& cells);

}  // namespace oboi
