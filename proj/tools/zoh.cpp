#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zoh/bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"zoh: zeroth-order hybrid gradient descent benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";
  int jobs = 1;

  CLI::App* run = app.add_subcommand("run", "run a seeded multi-trial experiment");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--jobs", jobs, "worker pool size");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--format", format, "trace format: csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  CLI::App* diag = app.add_subcommand("diag", "run the bound-satisfaction grid");
  diag->add_option("config", config_path, "diagnostics config (JSON)")->required();
  diag->add_option("--out", out_dir, "output directory");

  std::vector<std::string> summaries;
  std::string cmp_format = "csv";
  CLI::App* compare = app.add_subcommand("compare", "aggregate summary CSVs");
  compare->add_option("summaries", summaries, "summary.csv paths (>= 2)")->required();
  compare->add_option("--format", cmp_format, "table format: csv or md")
      ->check(CLI::IsMember({"csv", "md"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      zoh::ExperimentConfig cfg = zoh::load_experiment_config(config_path);
      zoh::RunOptions opts;
      opts.out_dir = out_dir;
      opts.jobs = jobs;
      opts.jsonl = format == "jsonl";
      return zoh::run_experiment(cfg, opts);
    }
    if (diag->parsed()) return zoh::run_diagnostics(config_path, out_dir);
    std::cout << zoh::compare_report(summaries, cmp_format);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
