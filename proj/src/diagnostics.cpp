#include "zoh/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace zoh {

double rge_variance_bound(const BoundInputs& inp) {
  if (inp.n_r < 1) throw std::invalid_argument("rge_variance_bound: n_r must be >= 1");
  const double br = inp.batch_r;
  const double dnr = inp.d_nr();
  const double gsq = sqnorm(inp.grad_at_x);
  const double bias_coeff = 1.0 + 2.0 / br + 2.0 / (inp.n_r * br);
  const double d2 = static_cast<double>(inp.d) * inp.d;
  return (2.0 / br) * dnr * (gsq + inp.sigma_sq()) +
         bias_coeff * inp.mu_r * inp.mu_r * inp.L * inp.L * d2 / 4.0;
}

double cge_variance_bound(const BoundInputs& inp) {
  const double bc = inp.batch_c;
  const double gsq = sqnorm(inp.grad_at_x);
  double total = 0.0;
  for (int i = 0; i < inp.d; ++i) {
    const double pi = inp.p.p[i];
    if (pi <= 0.0) throw std::invalid_argument("cge_variance_bound: p_i = 0");
    const double gi = inp.grad_at_x[i];
    const double mu2 = inp.mu_c[i] * inp.mu_c[i];
    const double bias = inp.L * inp.L * mu2 / 2.0;
    total += (2.0 * gi * gi + (3.0 / bc) * (inp.zeta * inp.zeta + bias) + bias) / pi;
  }
  return total - 2.0 * gsq;
}

double hge_variance_bound(const BoundInputs& inp, double alpha) {
  return 2.0 * alpha * alpha * rge_variance_bound(inp) +
         2.0 * (1.0 - alpha) * (1.0 - alpha) * cge_variance_bound(inp);
}

SqnormBounds sqnorm_bounds(const BoundInputs& inp) {
  const double br = inp.batch_r;
  const double bc = inp.batch_c;
  const double dnr = inp.d_nr();
  const double gsq = sqnorm(inp.grad_at_x);
  const double d2 = static_cast<double>(inp.d) * inp.d;

  SqnormBounds out;
  out.rge = (2.0 + (4.0 / br) * dnr) * gsq + (4.0 * inp.sigma_sq() / br) * dnr +
            (1.0 + 2.0 / br + 2.0 / (inp.n_r * br)) * inp.mu_r * inp.mu_r * inp.L *
                inp.L * d2 / 2.0;

  double cge = 0.0;
  for (int i = 0; i < inp.d; ++i) {
    const double pi = inp.p.p[i];
    if (pi <= 0.0) throw std::invalid_argument("sqnorm_bounds: p_i = 0");
    const double gi = inp.grad_at_x[i];
    const double mu2 = inp.mu_c[i] * inp.mu_c[i];
    cge += (2.0 * gi * gi + 3.0 * inp.zeta * inp.zeta / bc +
            (inp.L * inp.L * mu2 / 2.0) * (1.0 + 3.0 / bc)) /
           pi;
  }
  out.cge = cge;
  return out;
}

InnerProductBounds inner_product_bounds(const BoundInputs& inp) {
  const double gsq = sqnorm(inp.grad_at_x);
  const double mrdl = inp.mu_r * inp.d * inp.L;
  double max_mu_c = 0.0;
  for (double m : inp.mu_c) max_mu_c = std::max(max_mu_c, m);
  InnerProductBounds out;
  out.rge = -0.75 * gsq + mrdl * mrdl / 4.0;
  out.cge = -0.75 * gsq + inp.L * inp.L * inp.d * max_mu_c * max_mu_c;
  return out;
}

namespace {

GradientEstimate run_estimator(const Objective& obj, std::span<const double> x,
                               const EstimatorSpec& spec, Rng& rng, QueryCounter& qc) {
  switch (spec.kind) {
    case EstimatorKind::RGE:
      return rge(obj, x, spec.rge, rng, qc);
    case EstimatorKind::CGE_FULL:
      return cge_full(obj, x, spec.cge, rng, qc);
    case EstimatorKind::CGE_SAMPLED: {
      if (!spec.p) throw std::invalid_argument("empirical_moments: p required");
      const std::vector<int> coords = sample_coordinate_set(*spec.p, rng);
      return cge_sampled(obj, x, spec.cge, coords, *spec.p, rng, qc);
    }
    case EstimatorKind::HGE: {
      if (!spec.p) throw std::invalid_argument("empirical_moments: p required");
      const GradientEstimate r = rge(obj, x, spec.rge, rng, qc);
      const std::vector<int> coords = sample_coordinate_set(*spec.p, rng);
      const GradientEstimate c = cge_sampled(obj, x, spec.cge, coords, *spec.p, rng, qc);
      return hge(r, c, spec.alpha);
    }
  }
  throw std::logic_error("empirical_moments: unknown estimator kind");
}

struct TrialStats {
  double var = 0.0;     // ||g_hat - grad f||^2
  double sq = 0.0;      // ||g_hat||^2
  double inner = 0.0;   // <-grad f, g_hat>
};

EmpiricalMoments reduce(const Objective& obj, const std::vector<Vec>& means,
                        const std::vector<TrialStats>& stats, int d) {
  const int n = static_cast<int>(stats.size());
  EmpiricalMoments out;
  out.trials = n;
  out.mean.assign(d, 0.0);
  Vec mean_sq(d, 0.0);
  double sv = 0, svv = 0, ss = 0, sss = 0, si = 0, sii = 0;
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i < d; ++i) {
      out.mean[i] += means[t][i];
      mean_sq[i] += means[t][i] * means[t][i];
    }
    sv += stats[t].var;
    svv += stats[t].var * stats[t].var;
    ss += stats[t].sq;
    sss += stats[t].sq * stats[t].sq;
    si += stats[t].inner;
    sii += stats[t].inner * stats[t].inner;
  }
  const double dn = n;
  out.mean_se.assign(d, 0.0);
  for (int i = 0; i < d; ++i) {
    out.mean[i] /= dn;
    const double var = std::max(0.0, mean_sq[i] / dn - out.mean[i] * out.mean[i]);
    out.mean_se[i] = std::sqrt(var / dn);
  }
  auto finish = [dn](double s, double s2, double& m, double& se) {
    m = s / dn;
    const double var = std::max(0.0, s2 / dn - m * m);
    se = std::sqrt(var / dn);
  };
  finish(sv, svv, out.variance, out.variance_se);
  finish(ss, sss, out.sqnorm, out.sqnorm_se);
  finish(si, sii, out.inner, out.inner_se);
  (void)obj;
  return out;
}

void run_trial(const Objective& obj, std::span<const double> x, const EstimatorSpec& spec,
               const Vec& grad, std::uint64_t seed, int t, Vec& mean_out,
               TrialStats& stats_out) {
  Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
  QueryCounter qc;
  const GradientEstimate est = run_estimator(obj, x, spec, rng, qc);
  mean_out = est.vector;
  TrialStats s;
  for (std::size_t i = 0; i < est.vector.size(); ++i) {
    const double diff = est.vector[i] - grad[i];
    s.var += diff * diff;
    s.sq += est.vector[i] * est.vector[i];
    s.inner -= grad[i] * est.vector[i];
  }
  stats_out = s;
}

}  // namespace

EmpiricalMoments empirical_moments_serial(const Objective& obj, std::span<const double> x,
                                          const EstimatorSpec& spec, int trials,
                                          std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("empirical_moments: trials must be >= 1");
  if (!obj.has_oracle())
    throw std::invalid_argument("empirical_moments: exact oracle required");
  const Vec grad = obj.gradient(x);
  const int d = obj.dim();
  std::vector<Vec> means(trials);
  std::vector<TrialStats> stats(trials);
  for (int t = 0; t < trials; ++t)
    run_trial(obj, x, spec, grad, seed, t, means[t], stats[t]);
  return reduce(obj, means, stats, d);
}

EmpiricalMoments empirical_moments(const Objective& obj, std::span<const double> x,
                                   const EstimatorSpec& spec, int trials,
                                   std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("empirical_moments: trials must be >= 1");
  if (!obj.has_oracle())
    throw std::invalid_argument("empirical_moments: exact oracle required");
  const Vec grad = obj.gradient(x);
  const int d = obj.dim();
  std::vector<Vec> means(trials);
  std::vector<TrialStats> stats(trials);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int t = 0; t < trials; ++t)
    run_trial(obj, x, spec, grad, seed, t, means[t], stats[t]);
  // Reduction walks trials in index order, so the result does not depend on
  // the thread count.
  return reduce(obj, means, stats, d);
}

bool BoundReport::all_pass() const {
  for (const BoundCheck& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string BoundReport::to_json() const {
  nlohmann::json j;
  j["all_pass"] = all_pass();
  j["checks"] = nlohmann::json::array();
  for (const BoundCheck& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"bound", c.bound},
                           {"empirical", c.empirical},
                           {"empirical_se", c.empirical_se},
                           {"pass", c.pass}});
  }
  return j.dump(2);
}

BoundReport check_bounds(const Objective& obj, std::span<const double> x,
                         const BoundInputs& inp, double alpha, int trials,
                         std::uint64_t seed) {
  BoundReport report;
  auto add = [&report](const std::string& name, double bound, double emp, double se) {
    BoundCheck c;
    c.name = name;
    c.bound = bound;
    c.empirical = emp;
    c.empirical_se = se;
    c.pass = emp <= bound + 3.0 * se;
    report.checks.push_back(c);
  };

  EstimatorSpec spec;
  spec.rge.n_r = inp.n_r;
  spec.rge.mu_r = inp.mu_r;
  spec.rge.batch_size_r = inp.batch_r;
  spec.cge.mu_c = inp.mu_c;
  spec.cge.batch_size_c = inp.batch_c;
  spec.p = inp.p;
  spec.alpha = alpha;

  const SqnormBounds sq = sqnorm_bounds(inp);
  const InnerProductBounds ip = inner_product_bounds(inp);

  spec.kind = EstimatorKind::RGE;
  const EmpiricalMoments mr = empirical_moments(obj, x, spec, trials, seed);
  add("rge_variance", rge_variance_bound(inp), mr.variance, mr.variance_se);
  add("rge_sqnorm", sq.rge, mr.sqnorm, mr.sqnorm_se);
  add("rge_inner_product", ip.rge, mr.inner, mr.inner_se);

  spec.kind = EstimatorKind::CGE_SAMPLED;
  const EmpiricalMoments mc =
      empirical_moments(obj, x, spec, trials, splitmix64(seed) + 1);
  add("cge_variance", cge_variance_bound(inp), mc.variance, mc.variance_se);
  add("cge_sqnorm", sq.cge, mc.sqnorm, mc.sqnorm_se);

  // II uses the full CGE of f, mirrored here by the batch estimator mean.
  spec.kind = EstimatorKind::CGE_FULL;
  const EmpiricalMoments mf =
      empirical_moments(obj, x, spec, trials, splitmix64(seed) + 2);
  add("cge_inner_product", ip.cge, mf.inner, mf.inner_se);

  spec.kind = EstimatorKind::HGE;
  const EmpiricalMoments mh =
      empirical_moments(obj, x, spec, trials, splitmix64(seed) + 3);
  add("hge_variance", hge_variance_bound(inp, alpha), mh.variance, mh.variance_se);

  return report;
}

}  // namespace zoh
