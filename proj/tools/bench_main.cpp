// Timing comparison between the production (OpenMP + BLAS-style) kernel
// routines and the serial reference implementations used for testing.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "dikf/feature_maps.hpp"
#include "dikf/kernels.hpp"
#include "dikf/types.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using dikf::Index;
using dikf::Matrix;

Matrix randn(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (dt < best) best = dt;
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("  %-22s %10.4f ms %10.4f ms %8.2fx\n", name, serial * 1e3,
              parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
  const Index d = 16, n1 = 2000, n2 = 256, j = 256;
  std::mt19937_64 rng(7);
  const Matrix x1 = randn(d, n1, rng);
  const Matrix x2 = randn(d, n2, rng);
  const Matrix w = randn(n1, n2, rng);
  const dikf::KernelConfig kcfg{dikf::KernelFamily::gaussian, 0.5};
  const dikf::FourierMap fmap = dikf::init_fourier(kcfg, d, j, 11);

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("kernel backends: %lld x %lld block, d=%lld, %d thread(s)\n",
              static_cast<long long>(n1), static_cast<long long>(n2),
              static_cast<long long>(d), threads);
  std::printf("  %-22s %13s %13s %9s\n", "routine", "serial", "parallel",
              "speedup");

  const Matrix k = dikf::kernel_matrix(x1, x2, kcfg);
  // Consistency guard: a benchmark of two diverging implementations would
  // be meaningless.
  const double kdiff =
      (k - dikf::ref::kernel_matrix(x1, x2, kcfg)).cwiseAbs().maxCoeff();
  const double gdiff = (dikf::kernel_grad_contract(x1, x2, k, kcfg.gamma, w) -
                        dikf::ref::kernel_grad_contract(x1, x2, k, kcfg.gamma, w))
                           .cwiseAbs()
                           .maxCoeff();
  const double fdiff = (dikf::rf_features(x1, fmap) -
                        dikf::ref::rf_features(x1, fmap))
                           .cwiseAbs()
                           .maxCoeff();
  if (kdiff > 1e-10 || gdiff > 1e-8 || fdiff > 1e-10) {
    std::printf("backend mismatch: kernel %g, contract %g, features %g\n",
                kdiff, gdiff, fdiff);
    return 1;
  }

  const int reps = 5;
  report("kernel_matrix",
         best_of(reps, [&] { dikf::ref::kernel_matrix(x1, x2, kcfg); }),
         best_of(reps, [&] { dikf::kernel_matrix(x1, x2, kcfg); }));
  report("kernel_grad_contract",
         best_of(reps,
                 [&] {
                   dikf::ref::kernel_grad_contract(x1, x2, k, kcfg.gamma, w);
                 }),
         best_of(reps, [&] {
           dikf::kernel_grad_contract(x1, x2, k, kcfg.gamma, w);
         }));
  report("rf_features",
         best_of(reps, [&] { dikf::ref::rf_features(x1, fmap); }),
         best_of(reps, [&] { dikf::rf_features(x1, fmap); }));
  return 0;
}
