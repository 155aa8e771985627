// oboi: command-line front end.
//
//   oboi gen-synthetic --spec synth.json --out data/ --seed 7
//   oboi build-bag --manifest data/manifest.json --protocol 1sas --p 2 --out bag/
//   oboi evaluate --bag bag/ --split test [--table]
//   oboi sweep --manifest data/manifest.json --p 2,3,4,5 --R 1,4 --heads protonet,simpleshot --out sweep/
//   oboi validate data/manifest.json | bag/
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 internal invariant failure. Errors go to stderr as one JSON object.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oboi/dataset.h"
#include "oboi/episode.h"
#include "oboi/error.h"
#include "oboi/instance_bag.h"
#include "oboi/metrics.h"
#include "oboi/parallel.h"
#include "oboi/sweep.h"
#include "oboi/synthetic.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct ReductionFlags {
  std::string mode = "aee";
  int order = 4;
  bool standardize = false;
  bool no_mask = false;

  oboi::ReductionConfig config() const {
    oboi::ReductionConfig r;
    r.mode = oboi::parse_reduction_mode(mode);
    r.order = r.mode == oboi::ReductionMode::kAee ? order : 1;
    r.standardize = standardize;
    r.use_mask = !no_mask;
    oboi::check_reduction_config(r);
    return r;
  }
};

struct HeadFlags {
  std::string head = "protonet";
  std::string transform = "CL2N";
  bool no_conditioning = false;
  bool fallback = false;

  oboi::HeadConfig config() const {
    oboi::HeadConfig h;
    h.head = oboi::parse_head_kind(head);
    h.simpleshot_transform = oboi::parse_transform_kind(transform);
    h.conditioned = !no_conditioning;
    h.fallback_unconditioned = fallback;
    return h;
  }
};

void add_reduction_flags(CLI::App* cmd, ReductionFlags& f) {
  cmd->add_option("--mode", f.mode, "Embedding: logits, ee or aee")->check(CLI::IsMember({"logits", "ee", "aee"}));
  cmd->add_option("--R", f.order, "Number of moments for aee (1-8)")->check(CLI::Range(1, 8));
  cmd->add_flag("--standardize", f.standardize, "Standardize dimensions with support statistics");
  cmd->add_flag("--no-mask", f.no_mask, "Pool over the whole feature map");
}

void add_head_flags(CLI::App* cmd, HeadFlags& f) {
  cmd->add_option("--head", f.head, "protonet or simpleshot")->check(CLI::IsMember({"protonet", "simpleshot"}));
  cmd->add_option("--transform", f.transform, "SimpleShot transform: none, L2N or CL2N")
      ->check(CLI::IsMember({"none", "L2N", "CL2N"}, CLI::ignore_case));
  cmd->add_flag("--no-conditioning", f.no_conditioning, "Search all instances regardless of the detected object");
  cmd->add_flag("--fallback", f.fallback, "Search all instances when the detected object has none");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw oboi::Error(oboi::ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << text;
}

// --- gen-synthetic ---------------------------------------------------------

struct GenArgs {
  std::string spec;
  std::string out;
  std::uint64_t seed = 0;
};

int cmd_gen_synthetic(const GenArgs& a) {
  auto spec = oboi::load_synthetic_spec(a.spec);
  auto summary = oboi::gen_synthetic(spec, a.seed, a.out);
  std::cout << "objects " << summary.objects << "\ninstances " << summary.instances << "\nsequences "
            << summary.sequences << "\nsamples " << summary.samples << "\nmanifest " << summary.manifest.string()
            << "\n";
  return 0;
}

// --- build-bag -------------------------------------------------------------

struct BuildArgs {
  std::string manifest;
  std::string protocol = "1sas";
  std::size_t k = 1;
  std::size_t p = 0;
  bool balance = false;
  ReductionFlags reduction;
  HeadFlags head;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t threads = 0;
};

int cmd_build_bag(const BuildArgs& a) {
  const std::size_t threads = oboi::resolve_threads(a.threads);
  oboi::Dataset ds = oboi::load_dataset(a.manifest);
  if (a.p > 0) ds = oboi::select_instances(ds, a.p);
  if (a.balance) ds = oboi::balance_dataset(ds, a.seed);
  oboi::Episode ep = oboi::make_episode(ds, oboi::parse_protocol(a.protocol), a.k, a.seed);
  if (a.p > 0) ep.instances_per_object = a.p;

  const auto red = a.reduction.config();
  auto support = oboi::support_embeddings(ds, ep, red, threads);
  oboi::InstanceBag bag = oboi::build_bag(support, ds.label_space, red, a.head.config());

  const fs::path out(a.out);
  oboi::save_bag(out, bag);
  oboi::save_episode(out / "episode.json", ep);
  fs::path manifest = fs::absolute(a.manifest);
  json source = {{"manifest", fs::relative(manifest, fs::absolute(out)).generic_string()}};
  write_text(out / "source.json", source.dump(2) + "\n");
  std::cout << "prototypes " << bag.prototypes().size() << "\nsupport " << ep.support.size() << "\ntest "
            << ep.test.size() << "\nval " << ep.val.size() << "\nbag " << out.string() << "\n";
  return 0;
}

// --- evaluate --------------------------------------------------------------

struct EvalArgs {
  std::string bag;
  std::string split = "test";
  std::string manifest;  // overrides source.json
  bool table = false;
  std::size_t threads = 0;
};

int cmd_evaluate(const EvalArgs& a) {
  const fs::path dir(a.bag);
  oboi::InstanceBag bag = oboi::load_bag(dir);
  oboi::Episode ep = oboi::load_episode(dir / "episode.json");
  fs::path manifest = a.manifest;
  if (manifest.empty()) {
    std::ifstream in(dir / "source.json");
    if (!in) throw oboi::Error(oboi::ErrorCode::kIo, "bag has no source.json; pass --manifest");
    manifest = dir / json::parse(in).at("manifest").get<std::string>();
  }
  oboi::Dataset ds = oboi::load_dataset(manifest);
  auto report = oboi::evaluate(bag, ep, ds, oboi::parse_split(a.split), oboi::resolve_threads(a.threads));
  std::cout << (a.table ? oboi::report_to_table(report) : oboi::report_to_json(report));
  return 0;
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string manifest;
  std::string protocol = "1sas";
  std::vector<std::size_t> p;
  std::vector<std::size_t> shots{1};
  std::vector<int> orders{1, 4};
  std::vector<std::string> heads{"protonet"};
  std::string transform = "CL2N";
  int baseline = 1;
  bool standardize = false;
  bool no_mask = false;
  bool no_conditioning = false;
  bool fallback = false;
  std::string split = "test";
  std::uint64_t seed = 0;
  std::string out;
  std::size_t threads = 0;
};

int cmd_sweep(const SweepArgs& a) {
  oboi::SweepSpec spec;
  spec.protocol = oboi::parse_protocol(a.protocol);
  spec.instances_per_object = a.p;
  spec.shots = a.shots;
  spec.orders = a.orders;
  spec.heads.clear();
  for (const auto& h : a.heads) spec.heads.push_back(oboi::parse_head_kind(h));
  spec.transform = oboi::parse_transform_kind(a.transform);
  spec.baseline_order = a.baseline;
  spec.standardize = a.standardize;
  spec.use_mask = !a.no_mask;
  spec.conditioned = !a.no_conditioning;
  spec.fallback_unconditioned = a.fallback;
  spec.split = oboi::parse_split(a.split);
  spec.seed = a.seed;

  oboi::Dataset ds = oboi::load_dataset(a.manifest);
  auto cells = oboi::run_sweep(ds, spec, oboi::resolve_threads(a.threads));
  const fs::path out(a.out);
  fs::create_directories(out);
  for (const auto& c : cells) write_text(out / (oboi::sweep_cell_name(c) + ".json"), oboi::report_to_json(c.report));
  write_text(out / "summary.csv", oboi::sweep_to_csv(spec, cells));
  const std::string table = oboi::sweep_to_table(spec, cells);
  write_text(out / "summary.txt", table);
  std::cout << table;
  return 0;
}

// --- validate --------------------------------------------------------------

int cmd_validate(const std::string& path) {
  const fs::path target(path);
  oboi::ValidationReport report;
  if (fs::is_directory(target)) {
    report = oboi::validate_bag(target);
  } else {
    report = oboi::validate_dataset(target);
  }
  std::cout << oboi::report_to_json(report) << "\n";
  return report.empty() ? 0 : kExitData;
}

void print_error(std::string_view kind, const std::string& message) {
  json err = {{"error", std::string(kind)}, {"message", message}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-conditioned bag of instances: few-shot instance recognition on detector features"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: OBOI_THREADS or all cores)");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Generate a synthetic dataset");
  gen_cmd->add_option("--spec", gen.spec, "Synthetic spec JSON")->required();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build-bag", "Split a dataset and build an instance bag from its support");
  build_cmd->add_option("--manifest", build.manifest, "Dataset manifest")->required();
  build_cmd->add_option("--protocol", build.protocol, "1sas, 1s1s or kshot")
      ->check(CLI::IsMember({"1sas", "1s1s", "kshot"}));
  build_cmd->add_option("--k", build.k, "Shots per (instance, sequence) for kshot")->check(CLI::PositiveNumber);
  build_cmd->add_option("--p", build.p, "Keep the first p instances of each object")->check(CLI::PositiveNumber);
  build_cmd->add_flag("--balance", build.balance, "Down-sample every (instance, sequence) to the smallest count");
  add_reduction_flags(build_cmd, build.reduction);
  add_head_flags(build_cmd, build.head);
  build_cmd->add_option("--seed", build.seed, "Split seed");
  build_cmd->add_option("--out", build.out, "Bag directory")->required();
  build_cmd->add_option("--threads", build.threads, "Worker threads");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a bag on its episode's test or val split");
  eval_cmd->add_option("--bag", eval.bag, "Bag directory")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--split", eval.split, "test or val")->check(CLI::IsMember({"test", "val"}));
  eval_cmd->add_option("--manifest", eval.manifest, "Dataset manifest (default: the one the bag was built from)");
  eval_cmd->add_flag("--table", eval.table, "Print a text table instead of JSON");
  eval_cmd->add_option("--threads", eval.threads, "Worker threads");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment grid and write one report per cell");
  sweep_cmd->add_option("--manifest", sweep.manifest, "Dataset manifest")->required();
  sweep_cmd->add_option("--protocol", sweep.protocol, "1sas, 1s1s or kshot")
      ->check(CLI::IsMember({"1sas", "1s1s", "kshot"}));
  sweep_cmd->add_option("--p", sweep.p, "Instances per object, e.g. 2,3,4,5")->delimiter(',');
  sweep_cmd->add_option("--shots", sweep.shots, "Shots list (kshot)")->delimiter(',');
  sweep_cmd->add_option("--R", sweep.orders, "Moment orders; 1 is the plain mean")->delimiter(',')->check(CLI::Range(1, 8));
  sweep_cmd->add_option("--heads", sweep.heads, "protonet,simpleshot")->delimiter(',')
      ->check(CLI::IsMember({"protonet", "simpleshot"}));
  sweep_cmd->add_option("--transform", sweep.transform, "SimpleShot transform")->check(CLI::IsMember({"none", "L2N", "CL2N"}, CLI::ignore_case));
  sweep_cmd->add_option("--baseline-R", sweep.baseline, "R of the baseline cell for the delta column")->check(CLI::Range(1, 8));
  sweep_cmd->add_flag("--standardize", sweep.standardize, "Standardize dimensions with support statistics");
  sweep_cmd->add_flag("--no-mask", sweep.no_mask, "Pool over the whole feature map");
  sweep_cmd->add_flag("--no-conditioning", sweep.no_conditioning, "Unconditioned search");
  sweep_cmd->add_flag("--fallback", sweep.fallback, "Fall back to unconditioned search");
  sweep_cmd->add_option("--split", sweep.split, "test or val")->check(CLI::IsMember({"test", "val"}));
  sweep_cmd->add_option("--seed", sweep.seed, "Split seed");
  sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a dataset manifest or a bag directory");
  validate_cmd->add_option("path", validate_path, "manifest.json or bag directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  auto pick = [&](std::size_t local) { return local > 0 ? local : threads; };
  try {
    if (*gen_cmd) return cmd_gen_synthetic(gen);
    if (*build_cmd) {
      build.threads = pick(build.threads);
      return cmd_build_bag(build);
    }
    if (*eval_cmd) {
      eval.threads = pick(eval.threads);
      return cmd_evaluate(eval);
    }
    if (*sweep_cmd) {
      sweep.threads = pick(sweep.threads);
      return cmd_sweep(sweep);
    }
    if (*validate_cmd) return cmd_validate(validate_path);
  } catch (const oboi::Error& e) {
    print_error(oboi::error_name(e.code()), e.what());
    return kExitData;
  } catch (const json::exception& e) {
    print_error("InvalidManifest", e.what());
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    print_error("Io", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return kExitInternal;
  }
  return 1;
}
