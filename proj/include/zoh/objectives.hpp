#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zoh/rng.hpp"
#include "zoh/vec.hpp"

namespace zoh {

// Opaque stochastic-sample token. Objectives derive whatever randomness they
// need (noise vector, row index, ...) deterministically from the token, so
// evaluate(x, xi) is a pure function of its arguments.
using SampleId = std::uint64_t;

struct QueryCounter {
  std::uint64_t actual_evaluations = 0;
  std::uint64_t nominal_fqc = 0;
};

/// Known problem constants. Absent entries mean "unknown"; consumers that
/// need a constant (diagnostics, theoretical schedules) must refuse rather
/// than guess.
struct ObjectiveMetadata {
  std::optional<double> lipschitz_L;
  std::optional<double> coord_variance_zeta;
  std::optional<double> strong_convexity;
  std::optional<double> grad_bound;
  std::optional<double> domain_diameter;

  // d * zeta^2 when zeta is known.
  std::optional<double> full_variance_sigma_sq(int d) const {
    if (!coord_variance_zeta) return std::nullopt;
    return static_cast<double>(d) * (*coord_variance_zeta) * (*coord_variance_zeta);
  }
};

class Objective {
 public:
  virtual ~Objective() = default;

  int dim() const { return dim_; }
  const ObjectiveMetadata& metadata() const { return meta_; }

  SampleId draw_sample(Rng& rng) const { return rng(); }

  double evaluate(std::span<const double> x, SampleId xi, QueryCounter& qc) const {
    check_dim(x);
    ++qc.actual_evaluations;
    return eval(x, xi);
  }

  // Uncounted evaluation, for trace/diagnostic use only.
  double evaluate_uncounted(std::span<const double> x, SampleId xi) const {
    check_dim(x);
    return eval(x, xi);
  }

  // Exact oracle; available only on built-in test problems. Never consulted
  // by estimators or optimizers.
  virtual bool has_oracle() const { return false; }
  virtual Vec gradient(std::span<const double>) const {
    throw std::logic_error("objective: no exact oracle");
  }
  virtual Vec per_sample_gradient(std::span<const double>, SampleId) const {
    throw std::logic_error("objective: no per-sample oracle");
  }
  // Exact f(x) = E F(x; xi) when computable in closed form.
  virtual std::optional<double> exact_value(std::span<const double>) const {
    return std::nullopt;
  }

 protected:
  Objective(int dim, ObjectiveMetadata meta) : dim_(dim), meta_(std::move(meta)) {
    if (dim <= 0) throw std::invalid_argument("objective: dimension must be positive");
  }

  virtual double eval(std::span<const double> x, SampleId xi) const = 0;

  void check_dim(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
      throw std::invalid_argument("objective: dimension mismatch");
  }

 private:
  int dim_;
  ObjectiveMetadata meta_;
};

// f(x) = sum_i diag_i x_i^2 in expectation. Per-sample noise adds a linear
// term b(xi).x with b_i uniform on [-zeta*sqrt(3), zeta*sqrt(3)], so the
// coordinate-wise gradient noise variance equals zeta^2 exactly.
std::unique_ptr<Objective> make_quadratic(int d, const Vec& diag, double noise_zeta,
                                          std::uint64_t seed);

// Regularized logistic loss over rows of a dense feature matrix; the
// stochastic sample is a uniformly drawn row index.
std::unique_ptr<Objective> make_logistic(const std::vector<Vec>& features,
                                         const std::vector<int>& labels, double l2_reg);

// Frozen linear multi-class classifier (softmax logits = W z + b).
struct ToyClassifier {
  int n_classes = 0;
  int input_dim = 0;
  std::vector<Vec> weights;  // [n_classes][input_dim], row-major
  Vec bias;                  // [n_classes]

  Vec logits(std::span<const double> z) const;
  int predict(std::span<const double> z) const;

  static ToyClassifier load(const std::string& path);
  void save(const std::string& path) const;
};

// Untargeted C&W attack loss over a universal perturbation delta:
//   F(delta; i) = lambda * max(z_true - max_{j != true} z_j, -kappa) + ||delta||^2
// averaged over image index i. Only logit evaluation of the classifier is used
// on the evaluation path; the oracle uses the weights directly.
std::unique_ptr<Objective> make_cw_attack(ToyClassifier classifier,
                                          std::vector<Vec> images, std::vector<int> labels,
                                          double lambda, double kappa = 0.0);

struct AttackView {
  const ToyClassifier* classifier;
  const std::vector<Vec>* images;
  const std::vector<int>* labels;
};

// Introspection for attack-success accounting in the bench harness.
// Returns nullopt for non-attack objectives.
std::optional<AttackView> attack_view(const Objective& obj);

// CSV with header row "label,f0,f1,...".
void load_label_csv(const std::string& path, std::vector<Vec>& features,
                    std::vector<int>& labels);

}  // namespace zoh
