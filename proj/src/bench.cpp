#include "zoh/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "zoh/diagnostics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace zoh {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ObjectiveSpec parse_objective(const json& j) {
  ObjectiveSpec spec;
  const std::string name = j.at("name").get<std::string>();
  if (name == "quadratic") {
    const int d = j.at("d").get<int>();
    Vec diag;
    if (j.contains("diag"))
      diag = j.at("diag").get<Vec>();
    else
      diag.assign(d, j.value("diag_value", 1.0));
    const double zeta = j.value("zeta", 0.0);
    const std::uint64_t seed = j.value("seed", 0ull);
    spec.objective = make_quadratic(d, diag, zeta, seed);
  } else if (name == "logistic") {
    std::vector<Vec> features;
    std::vector<int> labels;
    load_label_csv(j.at("path").get<std::string>(), features, labels);
    spec.objective = make_logistic(features, labels, j.value("l2", 0.0));
  } else if (name == "cw_attack") {
    ToyClassifier clf = ToyClassifier::load(j.at("classifier").get<std::string>());
    std::vector<Vec> images;
    std::vector<int> labels;
    load_label_csv(j.at("images").get<std::string>(), images, labels);
    spec.objective = make_cw_attack(std::move(clf), std::move(images), std::move(labels),
                                    j.at("lambda").get<double>(), j.value("kappa", 0.0));
  } else {
    throw ConfigError("config: unknown objective '" + name + "'");
  }

  const int d = spec.objective->dim();
  if (j.contains("x0"))
    spec.x0 = j.at("x0").get<Vec>();
  else
    spec.x0.assign(d, j.value("x0_value", 0.0));
  if (static_cast<int>(spec.x0.size()) != d)
    throw ConfigError("config: x0 dimension mismatch");

  spec.json = j.dump();  // nlohmann objects are key-sorted, so this is canonical
  return spec;
}

StepSchedule parse_step(const json& j) {
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "constant") return StepSchedule::constant(j.at("eta").get<double>());
  if (mode == "theorem1") return StepSchedule::theorem1();
  if (mode == "sc_decay")
    return StepSchedule::sc_decay(j.at("a").get<double>(),
                                  j.at("sigma_bar").get<double>());
  throw ConfigError("config: unknown step mode '" + mode + "'");
}

AlphaPolicy parse_alpha(const json& j) {
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "optimal") return AlphaPolicy::optimal();
  if (mode == "constant") return AlphaPolicy::constant(j.at("value").get<double>());
  if (mode == "linear_ramp") return AlphaPolicy::linear_ramp();
  throw ConfigError("config: unknown alpha mode '" + mode + "'");
}

OutputRule parse_output(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "last") return OutputRule::last();
    if (s == "uniform_random") return OutputRule::uniform_random();
    throw ConfigError("config: unknown output rule '" + s + "'");
  }
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "weighted_average")
    return OutputRule::weighted_average(j.at("a").get<double>());
  throw ConfigError("config: unknown output rule '" + mode + "'");
}

MethodSpec parse_method(const json& j, int d) {
  MethodSpec spec;
  spec.method = j.at("method").get<std::string>();
  spec.label = j.value("label", spec.method);

  HgdConfig& cfg = spec.config;
  cfg.T = j.at("T").get<int>();
  cfg.step = parse_step(j.at("step"));
  if (j.contains("n_r")) {
    RgeConfig rge;
    rge.n_r = j.at("n_r").get<int>();
    rge.mu_r = j.at("mu_r").get<double>();
    rge.batch_size_r = j.value("batch_r", 1);
    cfg.rge = rge;
  }
  cfg.n_c = j.value("n_c", 0);
  if (cfg.n_c > 0)
    cfg.cge = CgeConfig::uniform(d, j.at("mu_c").get<double>(), j.value("batch_c", 1));
  cfg.alpha = j.contains("alpha") ? parse_alpha(j.at("alpha")) : AlphaPolicy::optimal();
  cfg.output_rule = j.contains("output") ? parse_output(j.at("output")) : OutputRule::last();

  if (spec.method != "zo_hgd" && spec.method != "zo_sgd" && spec.method != "zo_scd" &&
      spec.method != "zo_signsgd")
    throw ConfigError("config: unknown method '" + spec.method + "'");
  return spec;
}

RunTrace dispatch(const MethodSpec& m, const Objective& obj, Vec x0,
                  const IterObserver& observer) {
  if (m.method == "zo_hgd") return zo_hgd(obj, std::move(x0), m.config, observer);
  if (m.method == "zo_sgd") return zo_sgd(obj, std::move(x0), m.config, observer);
  if (m.method == "zo_scd") return zo_scd(obj, std::move(x0), m.config, observer);
  return zo_signsgd(obj, std::move(x0), m.config, observer);
}

int attack_misclassified(const AttackView& view, const Vec& delta) {
  int count = 0;
  Vec z(delta.size());
  for (std::size_t i = 0; i < view.images->size(); ++i) {
    for (std::size_t jx = 0; jx < delta.size(); ++jx)
      z[jx] = (*view.images)[i][jx] + delta[jx];
    if (view.classifier->predict(z) != (*view.labels)[i]) ++count;
  }
  return count;
}

void write_trace_csv(const std::string& path, const ExperimentConfig& cfg,
                     const MethodSpec& m, int trial, const RunTrace& trace,
                     std::uint64_t config_hash) {
  std::ofstream out(path);
  out << "# config_hash: " << hex64(config_hash) << "\n";
  out << "# method: " << m.label << "\n";
  out << "# trial: " << trial << "\n";
  out << "t,f_value,grad_norm_sq,alpha,eta,realized_I_size,actual_queries,nominal_fqc\n";
  const int n = static_cast<int>(trace.records.size());
  for (int i = 0; i < n; i += cfg.stride) {
    const TraceRecord& r = trace.records[i];
    out << r.t << ',' << (r.f_value ? fmt_double(*r.f_value) : "") << ','
        << (r.grad_norm_sq ? fmt_double(*r.grad_norm_sq) : "") << ','
        << fmt_double(r.alpha) << ',' << fmt_double(r.eta) << ','
        << r.realized_coord_count << ',' << r.actual_queries << ',' << r.nominal_fqc
        << "\n";
  }
}

void write_trace_jsonl(const std::string& path, const ExperimentConfig& cfg,
                       const MethodSpec& m, int trial, const RunTrace& trace,
                       std::uint64_t config_hash) {
  std::ofstream out(path);
  json header = {{"config_hash", hex64(config_hash)},
                 {"method", m.label},
                 {"trial", trial}};
  out << header.dump() << "\n";
  const int n = static_cast<int>(trace.records.size());
  for (int i = 0; i < n; i += cfg.stride) {
    const TraceRecord& r = trace.records[i];
    json row = {{"t", r.t},
                {"alpha", r.alpha},
                {"eta", r.eta},
                {"realized_I_size", r.realized_coord_count},
                {"actual_queries", r.actual_queries},
                {"nominal_fqc", r.nominal_fqc}};
    if (r.f_value) row["f_value"] = *r.f_value;
    if (r.grad_norm_sq) row["grad_norm_sq"] = *r.grad_norm_sq;
    out << row.dump() << "\n";
  }
}

}  // namespace

std::optional<std::uint64_t> seed_override_from_env() {
  const char* env = std::getenv("ZOH_SEED");
  if (!env || !*env) return std::nullopt;
  return std::strtoull(env, nullptr, 10);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }

  ExperimentConfig cfg;
  try {
    cfg.objective = parse_objective(j.at("objective"));
    const int d = cfg.objective.objective->dim();
    for (const json& m : j.at("methods")) cfg.methods.push_back(parse_method(m, d));
    cfg.trials = j.at("trials").get<int>();
    cfg.base_seed = j.value("base_seed", 0ull);
    if (j.contains("threshold")) cfg.threshold = j.at("threshold").get<double>();
    if (j.contains("attack_success_images"))
      cfg.attack_success_images = j.at("attack_success_images").get<int>();
    cfg.stride = j.value("stride", 1);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (cfg.trials < 1) throw ConfigError("config: trials must be >= 1");
  if (cfg.stride < 1) throw ConfigError("config: stride must be >= 1");
  if (cfg.methods.empty()) throw ConfigError("config: no methods");
  const int d = cfg.objective.objective->dim();
  for (const MethodSpec& m : cfg.methods) {
    // Surface config errors now rather than mid-run; the delegating methods
    // rewrite their configs, so only validate zo_hgd directly.
    if (m.method == "zo_hgd") m.config.validate(d);
  }
  if (const auto seed = seed_override_from_env()) cfg.base_seed = *seed;
  return cfg;
}

int run_experiment(ExperimentConfig& cfg, const RunOptions& opts,
                   std::vector<SummaryRow>* rows_out) {
  const Objective& obj = *cfg.objective.objective;
  const std::optional<AttackView> attack = attack_view(obj);

  json cfg_json = {{"objective", json::parse(cfg.objective.json)},
                   {"trials", cfg.trials},
                   {"base_seed", cfg.base_seed}};
  const std::uint64_t config_hash = fnv1a(cfg_json.dump());
  const std::uint64_t objective_hash = fnv1a(cfg.objective.json);

  const int n_methods = static_cast<int>(cfg.methods.size());
  const int n_runs = n_methods * cfg.trials;
  std::vector<RunTrace> traces(n_runs);
  std::vector<SummaryRow> rows(n_runs);
  std::vector<std::optional<std::uint64_t>> attack_queries(n_runs);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, opts.jobs))
#endif
  for (int run = 0; run < n_runs; ++run) {
    const int mi = run / cfg.trials;
    const int trial = run % cfg.trials;
    MethodSpec m = cfg.methods[mi];
    m.config.seed = cfg.base_seed + static_cast<std::uint64_t>(trial);

    std::optional<std::uint64_t> first_success;
    IterObserver observer;
    if (attack && cfg.attack_success_images) {
      observer = [&](int, const Vec& x, const TraceRecord& rec) {
        if (!first_success &&
            attack_misclassified(*attack, x) >= *cfg.attack_success_images)
          first_success = rec.actual_queries;
      };
    }

    const RunTrace trace = dispatch(m, obj, cfg.objective.x0, observer);

    SummaryRow row;
    row.method = m.label;
    row.trial = trial;
    const auto fv = obj.exact_value(trace.output);
    row.final_objective = fv ? *fv : obj.evaluate_uncounted(trace.output, 0);
    for (const TraceRecord& r : trace.records) {
      if (r.grad_norm_sq &&
          (!row.best_grad_norm_sq || *r.grad_norm_sq < *row.best_grad_norm_sq))
        row.best_grad_norm_sq = r.grad_norm_sq;
      if (cfg.threshold && !row.queries_to_threshold && r.f_value &&
          *r.f_value < *cfg.threshold)
        row.queries_to_threshold = r.actual_queries;
    }
    if (attack && cfg.attack_success_images) row.queries_to_threshold = first_success;
    if (!trace.records.empty()) {
      row.total_actual_queries = trace.records.back().actual_queries;
      row.total_nominal_fqc = trace.records.back().nominal_fqc;
    }
    row.wall_time_s = trace.wall_time_s;
    traces[run] = trace;
    rows[run] = row;
    attack_queries[run] = first_success;
  }

  fs::create_directories(opts.out_dir);
  bool diverged = false;
  for (int run = 0; run < n_runs; ++run) {
    const int mi = run / cfg.trials;
    const int trial = run % cfg.trials;
    const MethodSpec& m = cfg.methods[mi];
    const std::string stem = m.label + "_trial" + std::to_string(trial);
    const std::string path =
        (fs::path(opts.out_dir) / (stem + (opts.jsonl ? ".jsonl" : ".csv"))).string();
    if (opts.jsonl)
      write_trace_jsonl(path, cfg, m, trial, traces[run], config_hash);
    else
      write_trace_csv(path, cfg, m, trial, traces[run], config_hash);
    if (traces[run].status == RunStatus::DIVERGED) diverged = true;
  }

  std::ofstream out((fs::path(opts.out_dir) / "summary.csv").string());
  out << "# config_hash: " << hex64(config_hash) << "\n";
  out << "# objective_hash: " << hex64(objective_hash) << "\n";
  out << "method,trial,final_objective,best_grad_norm_sq,total_actual_queries,"
         "total_nominal_fqc,queries_to_threshold,wall_time_s\n";
  for (const SummaryRow& r : rows) {
    out << r.method << ',' << r.trial << ',' << fmt_double(r.final_objective) << ','
        << (r.best_grad_norm_sq ? fmt_double(*r.best_grad_norm_sq) : "") << ','
        << r.total_actual_queries << ',' << r.total_nominal_fqc << ','
        << (r.queries_to_threshold ? std::to_string(*r.queries_to_threshold) : "")
        << ',' << fmt_double(r.wall_time_s) << "\n";
  }

  if (rows_out) *rows_out = rows;
  return diverged ? 2 : 0;
}

int run_diagnostics(const std::string& config_path, const std::string& out_dir) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("config: cannot open " + config_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }

  ObjectiveSpec spec;
  std::vector<int> grid_nr, grid_nc;
  Vec grid_mu;
  int batch_r, batch_c, trials;
  std::uint64_t seed;
  double l_scale;
  Vec x;
  try {
    spec = parse_objective(j.at("objective"));
    const json& grid = j.at("grid");
    grid_nr = grid.at("n_r").get<std::vector<int>>();
    grid_nc = grid.at("n_c").get<std::vector<int>>();
    grid_mu = grid.at("mu").get<Vec>();
    batch_r = j.value("batch_r", 1);
    batch_c = j.value("batch_c", 1);
    trials = j.value("trials", 100000);
    seed = j.value("seed", 0ull);
    l_scale = j.value("L_scale", 1.0);
    if (j.contains("x"))
      x = j.at("x").get<Vec>();
    else
      x.assign(spec.objective->dim(), j.value("x_value", 1.0));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (grid_nr.empty() || grid_nc.empty() || grid_mu.empty())
    throw ConfigError("config: no configurations");
  const Objective& obj = *spec.objective;
  if (static_cast<int>(x.size()) != obj.dim())
    throw ConfigError("config: x dimension mismatch");
  if (!obj.has_oracle()) throw ConfigError("config: diagnostics need an exact oracle");
  if (!obj.metadata().lipschitz_L || !obj.metadata().coord_variance_zeta)
    throw ConfigError("config: diagnostics need known L and zeta");

  fs::create_directories(out_dir);
  const Vec grad = obj.gradient(x);
  bool all_pass = true;
  json index = json::array();
  for (int n_r : grid_nr) {
    for (int n_c : grid_nc) {
      for (double mu : grid_mu) {
        BoundInputs inp;
        inp.L = *obj.metadata().lipschitz_L * l_scale;
        inp.zeta = *obj.metadata().coord_variance_zeta;
        inp.d = obj.dim();
        inp.n_r = n_r;
        inp.batch_r = batch_r;
        inp.batch_c = batch_c;
        inp.mu_r = mu;
        inp.mu_c.assign(obj.dim(), mu);
        inp.p = sparsification_probabilities(grad, n_c);
        inp.grad_at_x = grad;
        const double alpha = optimal_alpha(n_r, inp.p, obj.dim());

        const BoundReport report = check_bounds(obj, x, inp, alpha, trials, seed);
        std::ostringstream name;
        name << "diag_nr" << n_r << "_nc" << n_c << "_mu" << mu << ".json";
        std::ofstream out((fs::path(out_dir) / name.str()).string());
        out << report.to_json() << "\n";
        index.push_back({{"file", name.str()}, {"all_pass", report.all_pass()}});
        if (!report.all_pass()) all_pass = false;
      }
    }
  }
  std::ofstream out((fs::path(out_dir) / "diag_index.json").string());
  out << index.dump(2) << "\n";
  return all_pass ? 0 : 3;
}

namespace {

struct ParsedSummary {
  std::string objective_hash;
  std::vector<SummaryRow> rows;
};

ParsedSummary parse_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("compare: cannot open " + path);
  ParsedSummary out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# objective_hash: ", 0) == 0) {
      out.objective_hash = line.substr(18);
      continue;
    }
    if (line.empty() || line[0] == '#' || line.rfind("method,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell;
    SummaryRow row;
    std::getline(ss, row.method, ',');
    std::getline(ss, cell, ',');
    row.trial = std::stoi(cell);
    std::getline(ss, cell, ',');
    row.final_objective = std::stod(cell);
    std::getline(ss, cell, ',');
    if (!cell.empty()) row.best_grad_norm_sq = std::stod(cell);
    std::getline(ss, cell, ',');
    row.total_actual_queries = std::stoull(cell);
    std::getline(ss, cell, ',');
    row.total_nominal_fqc = std::stoull(cell);
    std::getline(ss, cell, ',');
    if (!cell.empty()) row.queries_to_threshold = std::stoull(cell);
    out.rows.push_back(std::move(row));
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

}  // namespace

std::string compare_report(const std::vector<std::string>& summary_paths,
                           const std::string& format) {
  if (summary_paths.size() < 2)
    throw ConfigError("compare: need at least 2 summaries");
  std::vector<ParsedSummary> summaries;
  for (const std::string& p : summary_paths) summaries.push_back(parse_summary(p));
  for (std::size_t i = 1; i < summaries.size(); ++i)
    if (summaries[i].objective_hash != summaries[0].objective_hash)
      throw ConfigError("compare: mismatched objective specs");

  // Aggregate by method label, in first-seen order.
  std::vector<std::string> order;
  std::vector<std::vector<double>> finals;
  std::vector<std::vector<double>> queries;
  auto slot = [&](const std::string& m) -> std::size_t {
    for (std::size_t i = 0; i < order.size(); ++i)
      if (order[i] == m) return i;
    order.push_back(m);
    finals.emplace_back();
    queries.emplace_back();
    return order.size() - 1;
  };
  for (const ParsedSummary& s : summaries) {
    for (const SummaryRow& r : s.rows) {
      const std::size_t i = slot(r.method);
      finals[i].push_back(r.final_objective);
      if (r.queries_to_threshold)
        queries[i].push_back(static_cast<double>(*r.queries_to_threshold));
    }
  }

  std::ostringstream out;
  const bool md = format == "md";
  if (md) {
    out << "| method | trials | final_objective median | final_objective IQR | "
           "queries_to_threshold median |\n";
    out << "|---|---|---|---|---|\n";
  } else {
    out << "method,trials,final_objective_median,final_objective_iqr,"
           "queries_to_threshold_median\n";
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double med = median(finals[i]);
    const double iqr = quantile(finals[i], 0.75) - quantile(finals[i], 0.25);
    const std::string qmed =
        queries[i].empty() ? std::string() : fmt_double(median(queries[i]));
    if (md)
      out << "| " << order[i] << " | " << finals[i].size() << " | " << fmt_double(med)
          << " | " << fmt_double(iqr) << " | " << qmed << " |\n";
    else
      out << order[i] << ',' << finals[i].size() << ',' << fmt_double(med) << ','
          << fmt_double(iqr) << ',' << qmed << "\n";
  }
  return out.str();
}

}  // namespace zoh
