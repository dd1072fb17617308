#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zoh/objectives.hpp"
#include "zoh/optimize.hpp"

namespace zoh {

struct MethodSpec {
  std::string method;  // zo_hgd | zo_sgd | zo_scd | zo_signsgd
  std::string label;
  HgdConfig config;
};

struct ObjectiveSpec {
  std::string json;  // canonical dump, hashed into outputs
  std::unique_ptr<Objective> objective;
  Vec x0;
};

struct ExperimentConfig {
  ObjectiveSpec objective;
  std::vector<MethodSpec> methods;
  int trials = 1;
  std::uint64_t base_seed = 0;
  std::optional<double> threshold;       // queries-to-threshold on exact f
  std::optional<int> attack_success_images;  // attack runs: images misclassified
  int stride = 1;                        // trace row stride
};

struct SummaryRow {
  std::string method;
  int trial = 0;
  double final_objective = 0.0;
  std::optional<double> best_grad_norm_sq;
  std::uint64_t total_actual_queries = 0;
  std::uint64_t total_nominal_fqc = 0;
  std::optional<std::uint64_t> queries_to_threshold;
  double wall_time_s = 0.0;
};

ExperimentConfig load_experiment_config(const std::string& path);

// Parses ZOH_SEED (when set) as a base-seed override.
std::optional<std::uint64_t> seed_override_from_env();

struct RunOptions {
  std::string out_dir = ".";
  int jobs = 1;
  bool jsonl = false;
};

// Returns process exit status: 0 ok, 2 on divergence abort.
int run_experiment(ExperimentConfig& cfg, const RunOptions& opts,
                   std::vector<SummaryRow>* rows_out = nullptr);

// Bound-satisfaction grid. Returns 0 when every check passes, 3 otherwise.
int run_diagnostics(const std::string& config_path, const std::string& out_dir);

// Aggregates >= 2 summary CSVs into a per-method comparison table.
// format: "csv" or "md". Throws on mismatched objective specs.
std::string compare_report(const std::vector<std::string>& summary_paths,
                           const std::string& format = "csv");

std::uint64_t fnv1a(const std::string& data);

}  // namespace zoh
