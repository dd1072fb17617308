#include "zoh/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace zoh {

namespace {

class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Vec diag, double zeta, std::uint64_t seed, ObjectiveMetadata meta)
      : Objective(static_cast<int>(diag.size()), std::move(meta)),
        diag_(std::move(diag)),
        zeta_(zeta),
        seed_(seed) {}

  bool has_oracle() const override { return true; }

  Vec gradient(std::span<const double> x) const override {
    check_dim(x);
    Vec g(dim());
    for (int i = 0; i < dim(); ++i) g[i] = 2.0 * diag_[i] * x[i];
    return g;
  }

  Vec per_sample_gradient(std::span<const double> x, SampleId xi) const override {
    Vec g = gradient(x);
    if (zeta_ > 0.0) {
      Vec b = noise(xi);
      for (int i = 0; i < dim(); ++i) g[i] += b[i];
    }
    return g;
  }

  std::optional<double> exact_value(std::span<const double> x) const override {
    check_dim(x);
    double f = 0.0;
    for (int i = 0; i < dim(); ++i) f += diag_[i] * x[i] * x[i];
    return f;
  }

 protected:
  double eval(std::span<const double> x, SampleId xi) const override {
    double f = 0.0;
    for (int i = 0; i < dim(); ++i) f += diag_[i] * x[i] * x[i];
    if (zeta_ > 0.0) {
      Vec b = noise(xi);
      for (int i = 0; i < dim(); ++i) f += b[i] * x[i];
    }
    return f;
  }

 private:
  // b_i(xi) uniform on [-zeta sqrt(3), zeta sqrt(3)]: variance zeta^2, bounded.
  Vec noise(SampleId xi) const {
    Rng rng(derive_seed(seed_, xi));
    const double half = zeta_ * std::sqrt(3.0);
    std::uniform_real_distribution<double> u(-half, half);
    Vec b(dim());
    for (int i = 0; i < dim(); ++i) b[i] = u(rng);
    return b;
  }

  Vec diag_;
  double zeta_;
  std::uint64_t seed_;
};

class LogisticObjective final : public Objective {
 public:
  LogisticObjective(std::vector<Vec> features, std::vector<int> labels, double l2,
                    ObjectiveMetadata meta)
      : Objective(static_cast<int>(features.front().size()), std::move(meta)),
        features_(std::move(features)),
        labels_(std::move(labels)),
        l2_(l2) {}

  bool has_oracle() const override { return true; }

  Vec gradient(std::span<const double> x) const override {
    check_dim(x);
    Vec g(dim(), 0.0);
    const double n = static_cast<double>(features_.size());
    for (std::size_t r = 0; r < features_.size(); ++r) {
      const double m = labels_[r] * dot(features_[r], x);
      const double s = 1.0 / (1.0 + std::exp(m));  // sigma(-m)
      axpy(-labels_[r] * s / n, features_[r], g);
    }
    axpy(l2_, x, g);
    return g;
  }

  Vec per_sample_gradient(std::span<const double> x, SampleId xi) const override {
    check_dim(x);
    const std::size_t r = xi % features_.size();
    const double m = labels_[r] * dot(features_[r], x);
    const double s = 1.0 / (1.0 + std::exp(m));
    Vec g(dim(), 0.0);
    axpy(-labels_[r] * s, features_[r], g);
    axpy(l2_, x, g);
    return g;
  }

  std::optional<double> exact_value(std::span<const double> x) const override {
    check_dim(x);
    double f = 0.0;
    for (std::size_t r = 0; r < features_.size(); ++r)
      f += loss(x, r);
    return f / static_cast<double>(features_.size()) + 0.5 * l2_ * sqnorm(x);
  }

 protected:
  double eval(std::span<const double> x, SampleId xi) const override {
    const std::size_t r = xi % features_.size();
    return loss(x, r) + 0.5 * l2_ * sqnorm(x);
  }

 private:
  double loss(std::span<const double> x, std::size_t r) const {
    const double m = labels_[r] * dot(features_[r], x);
    // log(1 + exp(-m)) without overflow
    if (m > 0) return std::log1p(std::exp(-m));
    return -m + std::log1p(std::exp(m));
  }

  std::vector<Vec> features_;
  std::vector<int> labels_;
  double l2_;
};

class CwAttackObjective final : public Objective {
 public:
  CwAttackObjective(ToyClassifier clf, std::vector<Vec> images, std::vector<int> labels,
                    double lambda, double kappa, ObjectiveMetadata meta)
      : Objective(clf.input_dim, std::move(meta)),
        clf_(std::move(clf)),
        images_(std::move(images)),
        labels_(std::move(labels)),
        lambda_(lambda),
        kappa_(kappa) {}

  bool has_oracle() const override { return true; }

  Vec gradient(std::span<const double> delta) const override {
    check_dim(delta);
    Vec g(dim(), 0.0);
    const double m = static_cast<double>(images_.size());
    for (std::size_t i = 0; i < images_.size(); ++i) {
      Vec gi = cw_gradient(delta, i);
      axpy(lambda_ / m, gi, g);
    }
    axpy(2.0, delta, g);
    return g;
  }

  Vec per_sample_gradient(std::span<const double> delta, SampleId xi) const override {
    check_dim(delta);
    const std::size_t i = xi % images_.size();
    Vec g = cw_gradient(delta, i);
    for (double& v : g) v *= lambda_;
    axpy(2.0, delta, g);
    return g;
  }

  std::optional<double> exact_value(std::span<const double> delta) const override {
    check_dim(delta);
    double f = 0.0;
    for (std::size_t i = 0; i < images_.size(); ++i) f += cw_loss(delta, i);
    return lambda_ * f / static_cast<double>(images_.size()) + sqnorm(delta);
  }

  const ToyClassifier& classifier() const { return clf_; }
  const std::vector<Vec>& images() const { return images_; }
  const std::vector<int>& labels() const { return labels_; }

 protected:
  double eval(std::span<const double> delta, SampleId xi) const override {
    const std::size_t i = xi % images_.size();
    return lambda_ * cw_loss(delta, i) + sqnorm(delta);
  }

 private:
  double cw_loss(std::span<const double> delta, std::size_t i) const {
    Vec z(dim());
    for (int j = 0; j < dim(); ++j) z[j] = images_[i][j] + delta[j];
    const Vec logit = clf_.logits(z);
    const int t = labels_[i];
    double best_other = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < clf_.n_classes; ++c)
      if (c != t) best_other = std::max(best_other, logit[c]);
    return std::max(logit[t] - best_other, -kappa_);
  }

  Vec cw_gradient(std::span<const double> delta, std::size_t i) const {
    Vec z(dim());
    for (int j = 0; j < dim(); ++j) z[j] = images_[i][j] + delta[j];
    const Vec logit = clf_.logits(z);
    const int t = labels_[i];
    int best = -1;
    double best_other = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < clf_.n_classes; ++c) {
      if (c != t && logit[c] > best_other) {
        best_other = logit[c];
        best = c;
      }
    }
    Vec g(dim(), 0.0);
    if (logit[t] - best_other <= -kappa_) return g;  // clamp active
    for (int j = 0; j < dim(); ++j)
      g[j] = clf_.weights[t][j] - clf_.weights[best][j];
    return g;
  }

  ToyClassifier clf_;
  std::vector<Vec> images_;
  std::vector<int> labels_;
  double lambda_;
  double kappa_;
};

}  // namespace

std::unique_ptr<Objective> make_quadratic(int d, const Vec& diag, double noise_zeta,
                                          std::uint64_t seed) {
  if (d <= 0) throw std::invalid_argument("quadratic: d must be positive");
  if (static_cast<int>(diag.size()) != d)
    throw std::invalid_argument("quadratic: diag size mismatch");
  for (double a : diag)
    if (a <= 0.0) throw std::invalid_argument("quadratic: diag entries must be positive");
  if (noise_zeta < 0.0) throw std::invalid_argument("quadratic: zeta must be nonnegative");

  ObjectiveMetadata meta;
  meta.lipschitz_L = 2.0 * *std::max_element(diag.begin(), diag.end());
  meta.strong_convexity = 2.0 * *std::min_element(diag.begin(), diag.end());
  meta.coord_variance_zeta = noise_zeta;
  return std::make_unique<QuadraticObjective>(diag, noise_zeta, seed, std::move(meta));
}

std::unique_ptr<Objective> make_logistic(const std::vector<Vec>& features,
                                         const std::vector<int>& labels, double l2_reg) {
  if (features.empty()) throw std::invalid_argument("logistic: empty dataset");
  if (features.size() != labels.size())
    throw std::invalid_argument("logistic: feature/label count mismatch");
  const std::size_t d = features.front().size();
  for (const Vec& row : features)
    if (row.size() != d) throw std::invalid_argument("logistic: ragged feature rows");
  for (int y : labels)
    if (y != 1 && y != -1) throw std::invalid_argument("logistic: labels must be +-1");
  if (l2_reg < 0.0) throw std::invalid_argument("logistic: l2_reg must be nonnegative");

  // Trace bound on the logistic Hessian: (1/4n) sum ||f_i||^2, plus the
  // regularizer; valid, not tight.
  double sum_sq = 0.0;
  double max_abs = 0.0;
  for (const Vec& row : features) {
    sum_sq += sqnorm(row);
    for (double v : row) max_abs = std::max(max_abs, std::abs(v));
  }
  ObjectiveMetadata meta;
  meta.lipschitz_L = 0.25 * sum_sq / static_cast<double>(features.size()) + l2_reg;
  meta.coord_variance_zeta = 2.0 * max_abs;  // |grad F - grad f|_j <= 2 max|f_ij|
  if (l2_reg > 0.0) meta.strong_convexity = l2_reg;
  return std::make_unique<LogisticObjective>(features, labels, l2_reg, std::move(meta));
}

Vec ToyClassifier::logits(std::span<const double> z) const {
  Vec out(n_classes);
  for (int c = 0; c < n_classes; ++c) out[c] = dot(weights[c], z) + bias[c];
  return out;
}

int ToyClassifier::predict(std::span<const double> z) const {
  const Vec l = logits(z);
  return static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
}

ToyClassifier ToyClassifier::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("classifier: cannot open " + path);
  nlohmann::json j;
  in >> j;
  ToyClassifier clf;
  clf.n_classes = j.at("n_classes").get<int>();
  clf.input_dim = j.at("input_dim").get<int>();
  clf.bias = j.at("bias").get<Vec>();
  const auto flat = j.at("weights").get<Vec>();  // row-major [n_classes x input_dim]
  if (static_cast<int>(flat.size()) != clf.n_classes * clf.input_dim)
    throw std::runtime_error("classifier: weight count mismatch");
  if (static_cast<int>(clf.bias.size()) != clf.n_classes)
    throw std::runtime_error("classifier: bias count mismatch");
  clf.weights.resize(clf.n_classes);
  for (int c = 0; c < clf.n_classes; ++c)
    clf.weights[c] = Vec(flat.begin() + c * clf.input_dim,
                         flat.begin() + (c + 1) * clf.input_dim);
  return clf;
}

void ToyClassifier::save(const std::string& path) const {
  nlohmann::json j;
  j["n_classes"] = n_classes;
  j["input_dim"] = input_dim;
  j["bias"] = bias;
  Vec flat;
  for (const Vec& row : weights) flat.insert(flat.end(), row.begin(), row.end());
  j["weights"] = flat;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

std::unique_ptr<Objective> make_cw_attack(ToyClassifier classifier, std::vector<Vec> images,
                                          std::vector<int> labels, double lambda,
                                          double kappa) {
  if (images.empty()) throw std::invalid_argument("cw_attack: no images");
  if (images.size() != labels.size())
    throw std::invalid_argument("cw_attack: image/label count mismatch");
  if (lambda <= 0.0) throw std::invalid_argument("cw_attack: lambda must be positive");
  for (const Vec& img : images)
    if (static_cast<int>(img.size()) != classifier.input_dim)
      throw std::invalid_argument("cw_attack: image dimension mismatch");
  for (int y : labels)
    if (y < 0 || y >= classifier.n_classes)
      throw std::invalid_argument("cw_attack: label out of range");

  ObjectiveMetadata meta;
  // Only the ||delta||^2 term is curved; the C&W part is piecewise linear.
  meta.lipschitz_L = 2.0;
  return std::make_unique<CwAttackObjective>(std::move(classifier), std::move(images),
                                             std::move(labels), lambda, kappa,
                                             std::move(meta));
}

std::optional<AttackView> attack_view(const Objective& obj) {
  const auto* a = dynamic_cast<const CwAttackObjective*>(&obj);
  if (!a) return std::nullopt;
  return AttackView{&a->classifier(), &a->images(), &a->labels()};
}

void load_label_csv(const std::string& path, std::vector<Vec>& features,
                    std::vector<int>& labels) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path);
  features.clear();
  labels.clear();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ',')) continue;
    labels.push_back(std::stoi(cell));
    Vec row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    features.push_back(std::move(row));
  }
  if (features.empty()) throw std::runtime_error("csv: no data rows in " + path);
}

}  // namespace zoh
