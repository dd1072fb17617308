#pragma once

#include <optional>
#include <span>
#include <vector>

#include "zoh/rng.hpp"
#include "zoh/vec.hpp"

namespace zoh {

// Floor applied to coordinates whose probe magnitude is zero. The resulting
// excess over the budget is recorded, not renormalized away.
inline constexpr double kProbabilityFloor = 1e-6;

struct ProbabilityVector {
  Vec p;
  int budget_nc = 0;
  int k_star = 0;              // coordinates pinned at p_i = 1
  bool uniform_fallback = false;  // probe was all-zero, p_i = n_c/d used
  double floor_excess = 0.0;   // sum(p) - n_c introduced by flooring

  int dim() const { return static_cast<int>(p.size()); }
  // (1/d) sum 1/p_i
  double mean_inverse() const;
};

// Variance-minimizing selection probabilities for budget n_c:
// smallest k with |g_(k+1)|(n_c - k) <= sum_{i>k} |g_(i)|, p = 1 on the top-k
// set and proportional to |g_i| elsewhere.
ProbabilityVector sparsification_probabilities(std::span<const double> g, int n_c);

ProbabilityVector uniform_probabilities(int d, int n_c);

// Independent Bernoulli(p_i) inclusion; E|I| = sum p_i.
std::vector<int> sample_coordinate_set(const ProbabilityVector& p, Rng& rng);

// Q(g)_i = Z_i g_i / p_i with Z_i ~ Bernoulli(p_i); unbiased for g.
Vec sparsify(std::span<const double> g, const ProbabilityVector& p, Rng& rng);

// alpha* = [1 + (1 + d/n_r) / Pbar]^-1; 0 when n_r = 0.
double optimal_alpha(int n_r, const ProbabilityVector& p, int d);
double optimal_alpha_from_pbar(int n_r, double p_bar, int d);

// eta <= (1/24L) min{3 c_min, 1/d_nr}.
double theoretical_step_size(double L, double c_min, double d_nr);

enum class SmoothingMode { NONCONVEX, CONVEX, STRONGLY_CONVEX };

struct SmoothingParams {
  double L = 0.0;
  double sigma = 0.0;       // sqrt(d) * zeta
  int d = 0;
  int T = 0;
  double d_nr = 1.0;        // 1 + d/n_r
  double p_bar = 1.0;
  std::optional<double> strong_convexity;  // required for STRONGLY_CONVEX
};

struct SmoothingPair {
  double mu_c = 0.0;
  double mu_r = 0.0;
};

SmoothingPair theoretical_smoothing(SmoothingMode mode, const SmoothingParams& params);

}  // namespace zoh
