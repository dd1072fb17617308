#include "zoh/optimize.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zoh {

StepSchedule StepSchedule::constant(double eta) {
  StepSchedule s;
  s.mode = Mode::CONSTANT;
  s.eta = eta;
  return s;
}

StepSchedule StepSchedule::theorem1() {
  StepSchedule s;
  s.mode = Mode::THEOREM1_BOUND;
  return s;
}

StepSchedule StepSchedule::sc_decay(double a, double sigma_bar) {
  StepSchedule s;
  s.mode = Mode::SC_DECAY;
  s.sc_a = a;
  s.sc_sigma_bar = sigma_bar;
  return s;
}

void StepSchedule::validate() const {
  switch (mode) {
    case Mode::CONSTANT:
      if (eta < 0.0) throw std::invalid_argument("step: constant eta must be >= 0");
      break;
    case Mode::THEOREM1_BOUND:
      break;
    case Mode::SC_DECAY:
      if (sc_a <= 1.0) throw std::invalid_argument("step: sc_decay needs a > 1");
      if (sc_sigma_bar <= 0.0)
        throw std::invalid_argument("step: sc_decay needs sigma_bar > 0");
      break;
  }
}

AlphaPolicy AlphaPolicy::constant(double a) {
  if (a < 0.0 || a > 1.0)
    throw std::invalid_argument("alpha: constant value must be in [0, 1]");
  return {Mode::CONSTANT, a};
}

void HgdConfig::validate(int d) const {
  if (T < 1) throw std::invalid_argument("hgd: T must be >= 1");
  step.validate();
  if (rge) rge->validate();
  if (n_c < 0 || n_c > d) throw std::invalid_argument("hgd: need 0 <= n_c <= d");
  if (n_c > 0) {
    cge.validate();
    if (static_cast<int>(cge.mu_c.size()) != d)
      throw std::invalid_argument("hgd: cge mu_c dimension mismatch");
  }
  if (!rge && n_c == 0)
    throw std::invalid_argument("hgd: neither RGE nor CGE configured");
  // Degenerate cases pin alpha; OPTIMAL resolves to the pinned value itself.
  if (alpha.mode == AlphaPolicy::Mode::CONSTANT) {
    if (!rge && alpha.value != 0.0)
      throw std::invalid_argument("hgd: alpha must be 0 without RGE");
    if (n_c == 0 && alpha.value != 1.0)
      throw std::invalid_argument("hgd: alpha must be 1 with n_c = 0");
  }
  if (alpha.mode == AlphaPolicy::Mode::LINEAR_RAMP && (!rge || n_c == 0))
    throw std::invalid_argument("hgd: linear ramp needs both estimators");
}

namespace {

double resolve_theorem1_eta(const Objective& obj, const HgdConfig& cfg) {
  const auto& L = obj.metadata().lipschitz_L;
  if (!L) throw std::invalid_argument("hgd: theorem1 step needs known L");
  const int d = obj.dim();
  double bound = std::numeric_limits<double>::infinity();
  if (cfg.n_c > 0) bound = std::min(bound, 3.0 * static_cast<double>(cfg.n_c) / d);
  if (cfg.rge) bound = std::min(bound, 1.0 / (1.0 + static_cast<double>(d) / cfg.rge->n_r));
  return bound / (24.0 * *L);
}

double step_size(const StepSchedule& step, int t, double theorem1_eta) {
  switch (step.mode) {
    case StepSchedule::Mode::CONSTANT:
      return step.eta;
    case StepSchedule::Mode::THEOREM1_BOUND:
      return theorem1_eta;
    case StepSchedule::Mode::SC_DECAY:
      return 8.0 / (step.sc_sigma_bar * (step.sc_a + t));
  }
  return 0.0;
}

struct OutputAccumulator {
  OutputRule rule;
  int pick_index = 0;  // UNIFORM_RANDOM_ITERATE: index into {x_1 .. x_T}
  Vec picked;
  Vec weighted_sum;
  double weight_total = 0.0;

  void init(const OutputRule& r, int T, int d, Rng& rng) {
    rule = r;
    if (rule.mode == OutputRule::Mode::UNIFORM_RANDOM_ITERATE) {
      std::uniform_int_distribution<int> pick(1, T);
      pick_index = pick(rng);
    } else if (rule.mode == OutputRule::Mode::WEIGHTED_AVERAGE) {
      weighted_sum.assign(d, 0.0);
    }
  }

  // Called with x_t before the update (t = 0 .. T-1).
  void observe_pre(int t, const Vec& x) {
    if (rule.mode == OutputRule::Mode::WEIGHTED_AVERAGE) {
      const double w = (rule.wa_a + t) * (rule.wa_a + t);
      axpy(w, x, weighted_sum);
      weight_total += w;
    }
  }

  // Called with x_{t+1} after the update.
  void observe_post(int t, const Vec& x) {
    if (rule.mode == OutputRule::Mode::UNIFORM_RANDOM_ITERATE && t + 1 == pick_index)
      picked = x;
  }

  Vec finalize(const Vec& last) const {
    switch (rule.mode) {
      case OutputRule::Mode::LAST_ITERATE:
        return last;
      case OutputRule::Mode::UNIFORM_RANDOM_ITERATE:
        return picked.empty() ? last : picked;
      case OutputRule::Mode::WEIGHTED_AVERAGE: {
        Vec out = weighted_sum;
        for (double& v : out) v /= weight_total;
        return out;
      }
    }
    return last;
  }
};

}  // namespace

RunTrace zo_hgd(const Objective& obj, Vec x0, const HgdConfig& cfg,
                const IterObserver& observer) {
  const int d = obj.dim();
  if (static_cast<int>(x0.size()) != d)
    throw std::invalid_argument("hgd: x0 dimension mismatch");
  cfg.validate(d);

  const auto start = std::chrono::steady_clock::now();
  Rng rng = make_rng(cfg.seed);
  QueryCounter qc;

  const double theorem1_eta = (cfg.step.mode == StepSchedule::Mode::THEOREM1_BOUND)
                                  ? resolve_theorem1_eta(obj, cfg)
                                  : 0.0;
  const int n_r = cfg.rge ? cfg.rge->n_r : 0;

  RunTrace trace;
  trace.records.reserve(cfg.T);

  OutputAccumulator out;
  out.init(cfg.output_rule, cfg.T, d, rng);

  Vec x = std::move(x0);
  for (int t = 0; t < cfg.T; ++t) {
    const double eta = step_size(cfg.step, t, theorem1_eta);

    TraceRecord rec;
    rec.t = t;
    rec.eta = eta;
    rec.f_value = obj.exact_value(x);
    if (obj.has_oracle()) rec.grad_norm_sq = sqnorm(obj.gradient(x));

    GradientEstimate grad_r;
    grad_r.vector.assign(d, 0.0);
    if (cfg.rge) {
      grad_r = rge(obj, x, *cfg.rge, rng, qc);
      qc.nominal_fqc += 2ull * cfg.rge->n_r * cfg.rge->batch_size_r;
    }

    GradientEstimate grad_c;
    grad_c.vector.assign(d, 0.0);
    ProbabilityVector p;
    if (cfg.n_c > 0) {
      if (cfg.rge) {
        p = sparsification_probabilities(grad_r.vector, cfg.n_c);
        rec.uniform_fallback = p.uniform_fallback;
      } else {
        p = uniform_probabilities(d, cfg.n_c);
      }
      const std::vector<int> coords = sample_coordinate_set(p, rng);
      grad_c = cge_sampled(obj, x, cfg.cge, coords, p, rng, qc);
      qc.nominal_fqc += 2ull * cfg.n_c * cfg.cge.batch_size_c;
      rec.realized_coord_count = static_cast<int>(coords.size());
    }

    double alpha;
    switch (cfg.alpha.mode) {
      case AlphaPolicy::Mode::CONSTANT:
        alpha = cfg.alpha.value;
        break;
      case AlphaPolicy::Mode::LINEAR_RAMP:
        alpha = static_cast<double>(t) / cfg.T;
        break;
      case AlphaPolicy::Mode::OPTIMAL:
      default:
        if (cfg.n_c == 0)
          alpha = 1.0;
        else
          alpha = optimal_alpha(n_r, p, d);
        break;
    }
    rec.alpha = alpha;
    rec.actual_queries = qc.actual_evaluations;
    rec.nominal_fqc = qc.nominal_fqc;

    out.observe_pre(t, x);
    for (int i = 0; i < d; ++i)
      x[i] -= eta * (alpha * grad_r.vector[i] + (1.0 - alpha) * grad_c.vector[i]);
    out.observe_post(t, x);
    if (observer) observer(t, x, rec);

    trace.records.push_back(std::move(rec));
    if (norm(x) > kDivergenceNorm) {
      trace.status = RunStatus::DIVERGED;
      break;
    }
  }

  trace.last_iterate = x;
  trace.output = (trace.status == RunStatus::OK) ? out.finalize(x) : x;
  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

RunTrace zo_sgd(const Objective& obj, Vec x0, const HgdConfig& cfg,
                const IterObserver& observer) {
  if (!cfg.rge) throw std::invalid_argument("zo_sgd: rge config required");
  HgdConfig forced = cfg;
  forced.n_c = 0;
  forced.alpha = AlphaPolicy::constant(1.0);
  return zo_hgd(obj, std::move(x0), forced, observer);
}

RunTrace zo_scd(const Objective& obj, Vec x0, const HgdConfig& cfg,
                const IterObserver& observer) {
  HgdConfig forced = cfg;
  forced.rge.reset();
  forced.alpha = AlphaPolicy::constant(0.0);
  if (forced.n_c < 1) throw std::invalid_argument("zo_scd: n_c must be >= 1");
  return zo_hgd(obj, std::move(x0), forced, observer);
}

RunTrace zo_signsgd(const Objective& obj, Vec x0, const HgdConfig& cfg,
                    const IterObserver& observer) {
  const int d = obj.dim();
  if (static_cast<int>(x0.size()) != d)
    throw std::invalid_argument("signsgd: x0 dimension mismatch");
  if (!cfg.rge) throw std::invalid_argument("signsgd: rge config required");
  if (cfg.T < 1) throw std::invalid_argument("signsgd: T must be >= 1");
  cfg.step.validate();
  cfg.rge->validate();

  const auto start = std::chrono::steady_clock::now();
  Rng rng = make_rng(cfg.seed);
  QueryCounter qc;

  const double theorem1_eta = (cfg.step.mode == StepSchedule::Mode::THEOREM1_BOUND)
                                  ? resolve_theorem1_eta(obj, cfg)
                                  : 0.0;

  RunTrace trace;
  trace.records.reserve(cfg.T);
  OutputAccumulator out;
  out.init(cfg.output_rule, cfg.T, d, rng);

  Vec x = std::move(x0);
  for (int t = 0; t < cfg.T; ++t) {
    const double eta = step_size(cfg.step, t, theorem1_eta);

    TraceRecord rec;
    rec.t = t;
    rec.eta = eta;
    rec.alpha = 1.0;
    rec.f_value = obj.exact_value(x);
    if (obj.has_oracle()) rec.grad_norm_sq = sqnorm(obj.gradient(x));

    const GradientEstimate grad_r = rge(obj, x, *cfg.rge, rng, qc);
    qc.nominal_fqc += 2ull * cfg.rge->n_r * cfg.rge->batch_size_r;
    rec.actual_queries = qc.actual_evaluations;
    rec.nominal_fqc = qc.nominal_fqc;

    out.observe_pre(t, x);
    for (int i = 0; i < d; ++i) {
      const double g = grad_r.vector[i];
      x[i] -= eta * (g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0));
    }
    out.observe_post(t, x);
    if (observer) observer(t, x, rec);

    trace.records.push_back(std::move(rec));
    if (norm(x) > kDivergenceNorm) {
      trace.status = RunStatus::DIVERGED;
      break;
    }
  }

  trace.last_iterate = x;
  trace.output = (trace.status == RunStatus::OK) ? out.finalize(x) : x;
  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

}  // namespace zoh
