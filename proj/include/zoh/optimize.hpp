#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "zoh/estimators.hpp"
#include "zoh/importance.hpp"
#include "zoh/objectives.hpp"

namespace zoh {

struct StepSchedule {
  enum class Mode { CONSTANT, THEOREM1_BOUND, SC_DECAY };
  Mode mode = Mode::CONSTANT;
  double eta = 0.0;        // CONSTANT
  double sc_a = 0.0;       // SC_DECAY: eta_t = 8 / (sigma_bar (a + t)), a > 1
  double sc_sigma_bar = 0.0;

  static StepSchedule constant(double eta);
  static StepSchedule theorem1();  // resolved from metadata at run start
  static StepSchedule sc_decay(double a, double sigma_bar);

  void validate() const;
};

struct AlphaPolicy {
  enum class Mode { OPTIMAL, CONSTANT, LINEAR_RAMP };
  Mode mode = Mode::OPTIMAL;
  double value = 0.0;  // CONSTANT

  static AlphaPolicy optimal() { return {Mode::OPTIMAL, 0.0}; }
  static AlphaPolicy constant(double a);
  static AlphaPolicy linear_ramp() { return {Mode::LINEAR_RAMP, 0.0}; }
};

struct OutputRule {
  enum class Mode { UNIFORM_RANDOM_ITERATE, LAST_ITERATE, WEIGHTED_AVERAGE };
  Mode mode = Mode::LAST_ITERATE;
  double wa_a = 2.0;  // WEIGHTED_AVERAGE: w_t = (a + t)^2

  static OutputRule uniform_random() { return {Mode::UNIFORM_RANDOM_ITERATE, 0.0}; }
  static OutputRule last() { return {Mode::LAST_ITERATE, 0.0}; }
  static OutputRule weighted_average(double a) { return {Mode::WEIGHTED_AVERAGE, a}; }
};

struct HgdConfig {
  int T = 0;
  StepSchedule step;
  std::optional<RgeConfig> rge;  // absent => alpha must resolve to 0
  CgeConfig cge;
  int n_c = 0;                   // coordinate budget per iteration
  AlphaPolicy alpha;
  OutputRule output_rule;
  std::uint64_t seed = 0;

  void validate(int d) const;
};

struct TraceRecord {
  int t = 0;
  std::optional<double> f_value;       // exact f(x_t) when available
  std::optional<double> grad_norm_sq;  // exact ||grad f(x_t)||^2 when available
  double alpha = 0.0;
  double eta = 0.0;
  int realized_coord_count = 0;
  std::uint64_t actual_queries = 0;    // cumulative
  std::uint64_t nominal_fqc = 0;       // cumulative
  bool uniform_fallback = false;       // probe was all-zero this iteration
};

enum class RunStatus { OK, DIVERGED };

struct RunTrace {
  std::vector<TraceRecord> records;
  Vec output;       // final point per output rule
  Vec last_iterate;
  RunStatus status = RunStatus::OK;
  double wall_time_s = 0.0;
};

inline constexpr double kDivergenceNorm = 1e8;

// Called once per iteration with the post-update iterate; used by the bench
// harness for side metrics (attack success counts). Must not touch the
// objective's query counter.
using IterObserver = std::function<void(int t, const Vec& x, const TraceRecord& rec)>;

RunTrace zo_hgd(const Objective& obj, Vec x0, const HgdConfig& cfg,
                const IterObserver& observer = {});

// ZO-HGD with n_c = 0, alpha = 1 (RGE only).
RunTrace zo_sgd(const Objective& obj, Vec x0, const HgdConfig& cfg,
                const IterObserver& observer = {});

// ZO-HGD with n_r = 0, alpha = 0, uniform coordinate probabilities.
RunTrace zo_scd(const Objective& obj, Vec x0, const HgdConfig& cfg,
                const IterObserver& observer = {});

// x_{t+1} = x_t - eta_t sign(RGE), sign(0) = 0.
RunTrace zo_signsgd(const Objective& obj, Vec x0, const HgdConfig& cfg,
                    const IterObserver& observer = {});

}  // namespace zoh
