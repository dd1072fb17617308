#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "zoh/objectives.hpp"

using namespace zoh;

namespace {

Vec central_fd(const Objective& obj, const Vec& x, double h) {
  Vec g(obj.dim());
  Vec xp = x;
  // Differentiate the exact (full-batch) value: gradient() is the full-batch
  // gradient, while eval(x, xi) only sees sample xi.
  for (int i = 0; i < obj.dim(); ++i) {
    xp[i] = x[i] + h;
    const double plus = *obj.exact_value(xp);
    xp[i] = x[i] - h;
    const double minus = *obj.exact_value(xp);
    xp[i] = x[i];
    g[i] = (plus - minus) / (2.0 * h);
  }
  return g;
}

std::string data_path(const char* name) {
  const char* src = std::getenv("ZOH_SOURCE_DIR");
  return std::string(src ? src : ".") + "/data/" + name;
}

}  // namespace

TEST_CASE("quadratic: hand values") {
  const auto obj = make_quadratic(2, {1.0, 1.0}, 0.0, 0);
  const Vec x{1.0, 2.0};
  CHECK(obj->evaluate_uncounted(x, 123) == doctest::Approx(5.0));
  const Vec g = obj->gradient(x);
  CHECK(g[0] == doctest::Approx(2.0));
  CHECK(g[1] == doctest::Approx(4.0));

  const auto one = make_quadratic(1, {1.0}, 0.0, 0);
  CHECK(one->evaluate_uncounted(Vec{0.0}, 0) == doctest::Approx(0.0));
  CHECK(one->gradient(Vec{0.0})[0] == doctest::Approx(0.0));
}

TEST_CASE("quadratic: validation") {
  CHECK_THROWS(make_quadratic(0, {}, 0.0, 0));
  CHECK_THROWS(make_quadratic(2, {1.0, -1.0}, 0.0, 0));
  const auto obj = make_quadratic(2, {1.0, 1.0}, 0.0, 0);
  QueryCounter qc;
  CHECK_THROWS(obj->evaluate(Vec{1.0, 2.0, 3.0}, 0, qc));
}

TEST_CASE("quadratic: metadata constants") {
  const auto obj = make_quadratic(3, {1.0, 2.0, 3.0}, 0.25, 0);
  CHECK(*obj->metadata().lipschitz_L == doctest::Approx(6.0));
  CHECK(*obj->metadata().strong_convexity == doctest::Approx(2.0));
  CHECK(*obj->metadata().coord_variance_zeta == doctest::Approx(0.25));
  CHECK(*obj->metadata().full_variance_sigma_sq(3) == doctest::Approx(3 * 0.25 * 0.25));
}

TEST_CASE("quadratic: per-sample gradient mean matches exact gradient") {
  const auto obj = make_quadratic(3, {1.0, 2.0, 3.0}, 0.1, 7);
  const Vec x{1.0, 1.0, 1.0};
  const int n = 100000;
  Vec mean(3, 0.0);
  Rng rng = make_rng(13);
  for (int t = 0; t < n; ++t) {
    const SampleId xi = obj->draw_sample(rng);
    const Vec g = obj->per_sample_gradient(x, xi);
    for (int i = 0; i < 3; ++i) mean[i] += g[i] / n;
  }
  const Vec exact{2.0, 4.0, 6.0};
  const double se = 0.1 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] - exact[i]) < 3.0 * se);
}

TEST_CASE("quadratic: noiseless evaluation is sample-independent, noisy is not") {
  const auto clean = make_quadratic(2, {1.0, 2.0}, 0.0, 3);
  const Vec x{0.3, -0.7};
  CHECK(clean->evaluate_uncounted(x, 1) == clean->evaluate_uncounted(x, 999));

  const auto noisy = make_quadratic(2, {1.0, 2.0}, 0.5, 3);
  CHECK(noisy->evaluate_uncounted(x, 1) != noisy->evaluate_uncounted(x, 999));
  // deterministic given (x, xi)
  CHECK(noisy->evaluate_uncounted(x, 42) == noisy->evaluate_uncounted(x, 42));
}

TEST_CASE("query counter: exactly one increment per evaluate") {
  const auto obj = make_quadratic(2, {1.0, 1.0}, 0.0, 0);
  QueryCounter qc;
  const Vec x{1.0, 1.0};
  for (int k = 1; k <= 17; ++k) {
    obj->evaluate(x, k, qc);
    CHECK(qc.actual_evaluations == static_cast<std::uint64_t>(k));
  }
  obj->evaluate_uncounted(x, 0);
  CHECK(qc.actual_evaluations == 17);
}

TEST_CASE("logistic: zero feature row gives log 2 and zero gradient") {
  const std::vector<Vec> features{{0.0, 0.0, 0.0}};
  const auto obj = make_logistic(features, {1}, 0.0);
  const Vec x{0.4, -1.0, 2.0};
  CHECK(obj->evaluate_uncounted(x, 0) == doctest::Approx(std::log(2.0)));
  for (double g : obj->gradient(x)) CHECK(g == doctest::Approx(0.0));
}

TEST_CASE("logistic: gradient at origin closed form") {
  const std::vector<Vec> features{{1.0, 2.0}, {-0.5, 1.0}, {3.0, 0.0}};
  const std::vector<int> labels{1, -1, 1};
  const auto obj = make_logistic(features, labels, 0.1);
  const Vec x{0.0, 0.0};
  const Vec g = obj->gradient(x);
  // -(1/n) sum (y_i / 2) f_i at the origin; regularizer contributes 0
  for (int j = 0; j < 2; ++j) {
    double expect = 0.0;
    for (int i = 0; i < 3; ++i) expect -= labels[i] * features[i][j] / 2.0;
    expect /= 3.0;
    CHECK(g[j] == doctest::Approx(expect));
  }
}

TEST_CASE("logistic: validation") {
  CHECK_THROWS(make_logistic({}, {}, 0.0));
  CHECK_THROWS(make_logistic({{1.0}}, {2}, 0.0));
}

TEST_CASE("oracle vs central finite differences on built-ins") {
  std::vector<Vec> features;
  std::vector<int> labels;
  Rng rng = make_rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 8; ++i) {
    Vec row(5);
    for (double& v : row) v = gauss(rng);
    features.push_back(row);
    labels.push_back(i % 2 ? 1 : -1);
  }
  const auto logistic = make_logistic(features, labels, 0.1);
  const auto quadratic = make_quadratic(5, {0.5, 1.0, 1.5, 2.0, 2.5}, 0.0, 0);

  for (const Objective* obj : {logistic.get(), quadratic.get()}) {
    for (int rep = 0; rep < 100; ++rep) {
      Vec x(5);
      for (double& v : x) v = gauss(rng);
      const Vec g = obj->gradient(x);
      const Vec fd = central_fd(*obj, x, 1e-6);
      for (int i = 0; i < 5; ++i) CHECK(std::abs(g[i] - fd[i]) < 1e-4);
    }
  }
}

TEST_CASE("built-ins satisfy the claimed Lipschitz constant") {
  const auto obj = make_quadratic(4, {0.5, 1.0, 2.0, 3.0}, 0.0, 0);
  const double L = *obj->metadata().lipschitz_L;
  Rng rng = make_rng(11);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (int rep = 0; rep < 1000; ++rep) {
    Vec x(4), y(4);
    for (double& v : x) v = gauss(rng);
    for (double& v : y) v = gauss(rng);
    const Vec gx = obj->gradient(x);
    const Vec gy = obj->gradient(y);
    double diff_g = 0.0, diff_x = 0.0;
    for (int i = 0; i < 4; ++i) {
      diff_g += (gx[i] - gy[i]) * (gx[i] - gy[i]);
      diff_x += (x[i] - y[i]) * (x[i] - y[i]);
    }
    CHECK(std::sqrt(diff_g) <= L * std::sqrt(diff_x) + 1e-12);
  }
}

TEST_CASE("cw attack: clamp and regularizer at delta = 0") {
  ToyClassifier clf = ToyClassifier::load(data_path("classifier_toy.json"));
  std::vector<Vec> images;
  std::vector<int> labels;
  load_label_csv(data_path("toy_images.csv"), images, labels);
  const double kappa = 0.5;

  // Mislabel every image: the margin term is then negative and the kappa
  // clamp activates for confidently classified points.
  std::vector<int> wrong(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    wrong[i] = (labels[i] + 1) % clf.n_classes;
  const auto obj =
      make_cw_attack(clf, images, wrong, 10.0, kappa);
  const Vec zero(clf.input_dim, 0.0);

  double sum = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Vec logit = clf.logits(images[i]);
    double best_other = -1e300;
    for (int c = 0; c < clf.n_classes; ++c)
      if (c != wrong[i]) best_other = std::max(best_other, logit[c]);
    sum += std::max(logit[wrong[i]] - best_other, -kappa);
  }
  // ||0||^2 = 0, so the objective is the scaled loss sum alone.
  CHECK(*obj->exact_value(zero) ==
        doctest::Approx(10.0 * sum / static_cast<double>(images.size())));
}

TEST_CASE("cw attack: analytic gradient matches central differences off the kink") {
  ToyClassifier clf;
  clf.n_classes = 2;
  clf.input_dim = 3;
  clf.weights = {{1.0, -2.0, 0.5}, {-1.0, 0.3, 0.2}};
  clf.bias = {0.1, -0.1};
  const std::vector<Vec> images{{0.5, 0.5, 0.5}};
  const auto obj = make_cw_attack(clf, images, {0}, 2.0, 0.0);

  const Vec delta{0.1, -0.2, 0.3};
  const Vec g = obj->gradient(delta);
  const Vec fd = central_fd(*obj, delta, 1e-6);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(g[i] - fd[i]) < 1e-4);
}

TEST_CASE("cw attack: validation") {
  ToyClassifier clf;
  clf.n_classes = 2;
  clf.input_dim = 2;
  clf.weights = {{1.0, 0.0}, {0.0, 1.0}};
  clf.bias = {0.0, 0.0};
  CHECK_THROWS(make_cw_attack(clf, {{1.0, 0.0}}, {0, 1}, 1.0));  // count mismatch
  CHECK_THROWS(make_cw_attack(clf, {{1.0, 0.0}}, {0}, 0.0));     // lambda <= 0
  CHECK_THROWS(make_cw_attack(clf, {{1.0, 0.0}}, {5}, 1.0));     // label range
}

TEST_CASE("csv loader") {
  std::vector<Vec> features;
  std::vector<int> labels;
  load_label_csv(data_path("toy_images.csv"), features, labels);
  CHECK(features.size() == 10);
  CHECK(features.front().size() == 16);
  CHECK_THROWS(load_label_csv(data_path("missing.csv"), features, labels));
}
