#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zoh/estimators.hpp"
#include "zoh/importance.hpp"
#include "zoh/objectives.hpp"

namespace zoh {

struct BoundInputs {
  double L = 0.0;
  double zeta = 0.0;
  int d = 0;
  int n_r = 1;
  int batch_r = 1;
  int batch_c = 1;
  double mu_r = 0.0;
  Vec mu_c;                  // per coordinate
  ProbabilityVector p;
  Vec grad_at_x;             // exact gradient at the evaluation point

  double sigma_sq() const { return static_cast<double>(d) * zeta * zeta; }
  double d_nr() const { return 1.0 + static_cast<double>(d) / n_r; }
  double p_bar() const { return p.mean_inverse(); }
};

// Closed-form upper bound on E||rge - grad f||^2.
double rge_variance_bound(const BoundInputs& inp);

// Closed-form upper bound on E||cge_sampled - grad f||^2.
double cge_variance_bound(const BoundInputs& inp);

// 2 a^2 (rge bound) + 2 (1-a)^2 (cge bound).
double hge_variance_bound(const BoundInputs& inp, double alpha);

// Upper bounds on E||rge||^2 and E||cge_sampled||^2.
struct SqnormBounds {
  double rge = 0.0;
  double cge = 0.0;
};
SqnormBounds sqnorm_bounds(const BoundInputs& inp);

// Upper bounds on <-grad f, E rge> and <-grad f, full CGE>.
struct InnerProductBounds {
  double rge = 0.0;
  double cge = 0.0;
};
InnerProductBounds inner_product_bounds(const BoundInputs& inp);

// Which estimator the Monte-Carlo moments are taken over. For HGE the
// probability vector is fixed up front (the bounds condition on p).
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::RGE;
  RgeConfig rge;
  CgeConfig cge;
  std::optional<ProbabilityVector> p;  // CGE_SAMPLED / HGE
  double alpha = 0.5;                  // HGE
};

struct EmpiricalMoments {
  Vec mean;
  double variance = 0.0;      // E||g_hat - grad f||^2
  double sqnorm = 0.0;        // E||g_hat||^2
  double inner = 0.0;         // E<-grad f, g_hat>
  double variance_se = 0.0;
  double sqnorm_se = 0.0;
  double inner_se = 0.0;
  Vec mean_se;
  int trials = 0;
};

// Sample moments over independent trials. Requires the exact oracle.
// The parallel version partitions trials over OpenMP threads with one RNG
// stream per trial and reduces in trial order, so it is bit-identical to
// the serial reference for any thread count.
EmpiricalMoments empirical_moments(const Objective& obj, std::span<const double> x,
                                   const EstimatorSpec& spec, int trials,
                                   std::uint64_t seed);
EmpiricalMoments empirical_moments_serial(const Objective& obj, std::span<const double> x,
                                          const EstimatorSpec& spec, int trials,
                                          std::uint64_t seed);

struct BoundCheck {
  std::string name;
  double bound = 0.0;
  double empirical = 0.0;
  double empirical_se = 0.0;
  bool pass = false;  // empirical <= bound + 3 se
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  bool all_pass() const;
  std::string to_json() const;
};

// Evaluates every closed-form bound for one configuration against
// Monte-Carlo moments at point x.
BoundReport check_bounds(const Objective& obj, std::span<const double> x,
                         const BoundInputs& inp, double alpha, int trials,
                         std::uint64_t seed);

}  // namespace zoh
