// Throughput comparison of the serial reference Monte-Carlo kernel against
// the OpenMP version, plus a bitwise agreement check.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "zoh/diagnostics.hpp"
#include "zoh/objectives.hpp"

using namespace zoh;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  int trials = 200000;
  int d = 64;
  if (argc > 1) trials = std::atoi(argv[1]);
  if (argc > 2) d = std::atoi(argv[2]);

  const auto obj = make_quadratic(d, Vec(d, 1.0), 0.5, 42);
  Vec x(d, 1.0);

  EstimatorSpec spec;
  spec.kind = EstimatorKind::HGE;
  spec.rge.n_r = 4;
  spec.rge.mu_r = 1e-3;
  spec.cge = CgeConfig::uniform(d, 1e-3);
  spec.p = sparsification_probabilities(obj->gradient(x), d / 4);
  spec.alpha = 0.5;

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif
  std::printf("trials: %d, d: %d, estimator: HGE(n_r=4, n_c=d/4)\n", trials, d);

  auto t0 = std::chrono::steady_clock::now();
  const EmpiricalMoments serial = empirical_moments_serial(*obj, x, spec, trials, 7);
  const double serial_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const EmpiricalMoments parallel = empirical_moments(*obj, x, spec, trials, 7);
  const double parallel_s = seconds_since(t0);

  const bool identical = std::memcmp(serial.mean.data(), parallel.mean.data(),
                                     serial.mean.size() * sizeof(double)) == 0 &&
                         serial.variance == parallel.variance &&
                         serial.sqnorm == parallel.sqnorm;

  std::printf("serial:   %.3f s  (%.0f trials/s)\n", serial_s, trials / serial_s);
  std::printf("parallel: %.3f s  (%.0f trials/s)\n", parallel_s, trials / parallel_s);
  std::printf("speedup:  %.2fx\n", serial_s / parallel_s);
  std::printf("bitwise identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
