#include "zoh/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "zoh/importance.hpp"

namespace zoh {

void RgeConfig::validate() const {
  if (n_r < 1) throw std::invalid_argument("rge: n_r must be >= 1");
  if (mu_r <= 0.0) throw std::invalid_argument("rge: mu_r must be positive");
  if (batch_size_r < 1) throw std::invalid_argument("rge: batch_size_r must be >= 1");
}

CgeConfig CgeConfig::uniform(int d, double mu, int batch) {
  CgeConfig cfg;
  cfg.mu_c.assign(d, mu);
  cfg.batch_size_c = batch;
  return cfg;
}

void CgeConfig::validate() const {
  if (mu_c.empty()) throw std::invalid_argument("cge: mu_c is empty");
  for (double m : mu_c)
    if (m <= 0.0) throw std::invalid_argument("cge: mu_c entries must be positive");
  if (batch_size_c < 1) throw std::invalid_argument("cge: batch_size_c must be >= 1");
}

Vec sample_unit_sphere(int d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("sample_unit_sphere: d must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec u(d);
  double nrm;
  do {
    for (int i = 0; i < d; ++i) u[i] = gauss(rng);
    nrm = norm(u);
  } while (nrm == 0.0);
  for (int i = 0; i < d; ++i) u[i] /= nrm;
  return u;
}

GradientEstimate rge(const Objective& obj, std::span<const double> x,
                     const RgeConfig& cfg, Rng& rng, QueryCounter& qc) {
  cfg.validate();
  const int d = obj.dim();
  const std::uint64_t before = qc.actual_evaluations;

  GradientEstimate out;
  out.kind = EstimatorKind::RGE;
  out.vector.assign(d, 0.0);

  Vec xp(d);
  const double scale = 1.0 / (static_cast<double>(cfg.n_r) * cfg.batch_size_r);
  for (int b = 0; b < cfg.batch_size_r; ++b) {
    const SampleId xi = obj.draw_sample(rng);
    const double base = obj.evaluate(x, xi, qc);  // shared across directions
    for (int k = 0; k < cfg.n_r; ++k) {
      const Vec u = sample_unit_sphere(d, rng);
      for (int i = 0; i < d; ++i) xp[i] = x[i] + cfg.mu_r * u[i];
      const double fwd = obj.evaluate(xp, xi, qc);
      const double coeff = scale * d * (fwd - base) / cfg.mu_r;
      axpy(coeff, u, out.vector);
    }
  }
  out.queries_used = qc.actual_evaluations - before;
  return out;
}

double cge_component(const Objective& obj, std::span<const double> x, int i,
                     double mu_ci, SampleId xi, QueryCounter& qc) {
  if (i < 0 || i >= obj.dim()) throw std::out_of_range("cge_component: index out of range");
  if (mu_ci <= 0.0) throw std::invalid_argument("cge_component: mu must be positive");
  Vec xp(x.begin(), x.end());
  xp[i] = x[i] + mu_ci;
  const double plus = obj.evaluate(xp, xi, qc);
  xp[i] = x[i] - mu_ci;
  const double minus = obj.evaluate(xp, xi, qc);
  return (plus - minus) / (2.0 * mu_ci);
}

GradientEstimate cge_full(const Objective& obj, std::span<const double> x,
                          const CgeConfig& cfg, Rng& rng, QueryCounter& qc) {
  cfg.validate();
  const int d = obj.dim();
  const std::uint64_t before = qc.actual_evaluations;

  GradientEstimate out;
  out.kind = EstimatorKind::CGE_FULL;
  out.vector.assign(d, 0.0);

  const double scale = 1.0 / cfg.batch_size_c;
  for (int b = 0; b < cfg.batch_size_c; ++b) {
    const SampleId xi = obj.draw_sample(rng);
    for (int i = 0; i < d; ++i)
      out.vector[i] += scale * cge_component(obj, x, i, cfg.mu_c[i], xi, qc);
  }
  out.queries_used = qc.actual_evaluations - before;
  return out;
}

GradientEstimate cge_sampled(const Objective& obj, std::span<const double> x,
                             const CgeConfig& cfg, const std::vector<int>& coords,
                             const ProbabilityVector& p, Rng& rng, QueryCounter& qc) {
  cfg.validate();
  const int d = obj.dim();
  const std::uint64_t before = qc.actual_evaluations;

  GradientEstimate out;
  out.kind = EstimatorKind::CGE_SAMPLED;
  out.vector.assign(d, 0.0);

  for (int i : coords) {
    if (i < 0 || i >= d) throw std::out_of_range("cge_sampled: coordinate out of range");
    if (p.p[i] <= 0.0)
      throw std::invalid_argument("cge_sampled: selected coordinate has p_i = 0");
  }

  const double scale = 1.0 / cfg.batch_size_c;
  for (int b = 0; b < cfg.batch_size_c; ++b) {
    const SampleId xi = obj.draw_sample(rng);
    for (int i : coords)
      out.vector[i] += scale * cge_component(obj, x, i, cfg.mu_c[i], xi, qc) / p.p[i];
  }
  out.queries_used = qc.actual_evaluations - before;
  return out;
}

GradientEstimate hge(const GradientEstimate& rge_est, const GradientEstimate& cge_est,
                     double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("hge: alpha must be in [0, 1]");
  if (rge_est.vector.size() != cge_est.vector.size())
    throw std::invalid_argument("hge: dimension mismatch");

  GradientEstimate out;
  out.kind = EstimatorKind::HGE;
  out.alpha_used = alpha;
  out.queries_used = rge_est.queries_used + cge_est.queries_used;
  out.vector.resize(rge_est.vector.size());
  for (std::size_t i = 0; i < out.vector.size(); ++i)
    out.vector[i] = alpha * rge_est.vector[i] + (1.0 - alpha) * cge_est.vector[i];
  return out;
}

}  // namespace zoh
