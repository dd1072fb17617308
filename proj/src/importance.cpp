#include "zoh/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace zoh {

double ProbabilityVector::mean_inverse() const {
  double s = 0.0;
  for (double pi : p) {
    if (pi <= 0.0) throw std::invalid_argument("probability vector: p_i <= 0");
    s += 1.0 / pi;
  }
  return s / static_cast<double>(p.size());
}

ProbabilityVector uniform_probabilities(int d, int n_c) {
  if (n_c < 1 || n_c > d)
    throw std::invalid_argument("uniform_probabilities: need 1 <= n_c <= d");
  ProbabilityVector out;
  out.p.assign(d, static_cast<double>(n_c) / d);
  out.budget_nc = n_c;
  out.k_star = (n_c == d) ? d : 0;
  return out;
}

ProbabilityVector sparsification_probabilities(std::span<const double> g, int n_c) {
  const int d = static_cast<int>(g.size());
  if (d == 0) throw std::invalid_argument("sparsification: empty probe");
  if (n_c < 1 || n_c > d)
    throw std::invalid_argument("sparsification: need 1 <= n_c <= d");

  Vec mag(d);
  bool all_zero = true;
  for (int i = 0; i < d; ++i) {
    mag[i] = std::abs(g[i]);
    if (mag[i] != 0.0) all_zero = false;
  }
  if (all_zero) {
    ProbabilityVector out = uniform_probabilities(d, n_c);
    out.uniform_fallback = true;
    return out;
  }

  // Magnitudes in descending order; ties broken by lower index.
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return mag[a] > mag[b]; });

  // suffix[k] = sum of |g| over sorted positions k..d-1
  Vec suffix(d + 1, 0.0);
  for (int k = d - 1; k >= 0; --k) suffix[k] = suffix[k + 1] + mag[order[k]];

  // Smallest k with |g_(k+1)| (n_c - k) <= sum_{i>k} |g_(i)|; k = n_c always
  // satisfies it vacuously.
  int k = n_c;
  for (int cand = 0; cand < n_c; ++cand) {
    if (mag[order[cand]] * (n_c - cand) <= suffix[cand]) {
      k = cand;
      break;
    }
  }

  ProbabilityVector out;
  out.p.assign(d, 0.0);
  out.budget_nc = n_c;
  out.k_star = k;
  const double tail = suffix[k];
  for (int pos = 0; pos < d; ++pos) {
    const int i = order[pos];
    if (pos < k) {
      out.p[i] = 1.0;
    } else if (tail > 0.0) {
      out.p[i] = std::min(1.0, mag[i] * (n_c - k) / tail);
    }
  }
  for (int i = 0; i < d; ++i) {
    if (out.p[i] <= 0.0) {
      out.p[i] = kProbabilityFloor;
      out.floor_excess += kProbabilityFloor;
    }
  }
  return out;
}

std::vector<int> sample_coordinate_set(const ProbabilityVector& p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> coords;
  for (int i = 0; i < p.dim(); ++i)
    if (u(rng) < p.p[i]) coords.push_back(i);
  return coords;
}

Vec sparsify(std::span<const double> g, const ProbabilityVector& p, Rng& rng) {
  if (static_cast<int>(g.size()) != p.dim())
    throw std::invalid_argument("sparsify: dimension mismatch");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec out(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (u(rng) < p.p[i]) out[i] = g[i] / p.p[i];
  return out;
}

double optimal_alpha_from_pbar(int n_r, double p_bar, int d) {
  if (n_r == 0) return 0.0;
  if (n_r < 0) throw std::invalid_argument("optimal_alpha: n_r must be nonnegative");
  const double d_nr = 1.0 + static_cast<double>(d) / n_r;
  return 1.0 / (1.0 + d_nr / p_bar);
}

double optimal_alpha(int n_r, const ProbabilityVector& p, int d) {
  if (n_r == 0) return 0.0;
  return optimal_alpha_from_pbar(n_r, p.mean_inverse(), d);
}

double theoretical_step_size(double L, double c_min, double d_nr) {
  if (L <= 0.0) throw std::invalid_argument("theoretical_step_size: L must be positive");
  if (c_min <= 0.0 || c_min > 1.0)
    throw std::invalid_argument("theoretical_step_size: c_min must be in (0, 1]");
  if (d_nr < 1.0) throw std::invalid_argument("theoretical_step_size: d_nr must be >= 1");
  return std::min(3.0 * c_min, 1.0 / d_nr) / (24.0 * L);
}

SmoothingPair theoretical_smoothing(SmoothingMode mode, const SmoothingParams& params) {
  if (params.d <= 0 || params.T <= 0 || params.L <= 0.0)
    throw std::invalid_argument("theoretical_smoothing: need d, T, L");
  const double d = params.d;
  SmoothingPair out;
  switch (mode) {
    case SmoothingMode::NONCONVEX: {
      // mu_c ~ (d_nr / (d^2 T))^{1/4} (1 + d_nr / Pbar)^{-1/4}, unit constant,
      // capped so mu_c L sqrt(d) <= sigma when sigma is known.
      double mu_c = std::pow(params.d_nr / (d * d * params.T), 0.25) *
                    std::pow(1.0 + params.d_nr / params.p_bar, -0.25);
      if (params.sigma > 0.0)
        mu_c = std::min(mu_c, params.sigma / (params.L * std::sqrt(d)));
      out.mu_c = mu_c;
      out.mu_r = 2.0 * mu_c / std::sqrt(d);
      break;
    }
    case SmoothingMode::CONVEX: {
      if (params.sigma <= 0.0)
        throw std::invalid_argument("theoretical_smoothing: convex mode needs sigma");
      out.mu_c = params.sigma / (params.L * std::sqrt(d * static_cast<double>(params.T)));
      out.mu_r = 2.0 * out.mu_c / std::sqrt(d);
      break;
    }
    case SmoothingMode::STRONGLY_CONVEX: {
      if (!params.strong_convexity || *params.strong_convexity <= 0.0)
        throw std::invalid_argument("theoretical_smoothing: missing strong convexity");
      if (params.sigma <= 0.0)
        throw std::invalid_argument("theoretical_smoothing: sc mode needs sigma");
      out.mu_c = params.sigma / (params.L * std::sqrt(d * static_cast<double>(params.T)));
      out.mu_r = out.mu_c * std::sqrt(d * params.L / *params.strong_convexity);
      break;
    }
  }
  return out;
}

}  // namespace zoh
