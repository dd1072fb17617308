#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zoh/objectives.hpp"
#include "zoh/rng.hpp"
#include "zoh/vec.hpp"

namespace zoh {

struct RgeConfig {
  int n_r = 1;          // random directions per sample
  double mu_r = 1e-3;   // smoothing radius
  int batch_size_r = 1; // |B_r|

  void validate() const;
};

struct CgeConfig {
  Vec mu_c;             // per-coordinate smoothing radii
  int batch_size_c = 1; // |B_c|

  static CgeConfig uniform(int d, double mu, int batch = 1);
  void validate() const;
};

enum class EstimatorKind { RGE, CGE_FULL, CGE_SAMPLED, HGE };

struct GradientEstimate {
  Vec vector;
  EstimatorKind kind = EstimatorKind::RGE;
  std::uint64_t queries_used = 0;
  std::optional<double> alpha_used;
};

struct ProbabilityVector;  // importance.hpp

// Uniform draw from the unit sphere in R^d (normalized Gaussian).
Vec sample_unit_sphere(int d, Rng& rng);

// Forward-difference estimate along n_r fresh sphere directions per sample,
// averaged over batch_size_r stochastic samples. The base value F(x; xi) is
// evaluated once per sample and shared across directions.
GradientEstimate rge(const Objective& obj, std::span<const double> x,
                     const RgeConfig& cfg, Rng& rng, QueryCounter& qc);

// Central difference along coordinate i; consumes exactly 2 evaluations.
double cge_component(const Objective& obj, std::span<const double> x, int i,
                     double mu_ci, SampleId xi, QueryCounter& qc);

GradientEstimate cge_full(const Objective& obj, std::span<const double> x,
                          const CgeConfig& cfg, Rng& rng, QueryCounter& qc);

// Importance-weighted sampled CGE: entry i in coords gets cge_component(i)/p_i,
// zeros elsewhere. Unbiased for the full CGE under Bernoulli(p) coordinate sets.
GradientEstimate cge_sampled(const Objective& obj, std::span<const double> x,
                             const CgeConfig& cfg, const std::vector<int>& coords,
                             const ProbabilityVector& p, Rng& rng, QueryCounter& qc);

// alpha * rge + (1 - alpha) * cge.
GradientEstimate hge(const GradientEstimate& rge_est, const GradientEstimate& cge_est,
                     double alpha);

}  // namespace zoh
