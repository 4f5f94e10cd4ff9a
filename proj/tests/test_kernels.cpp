#include <random>

#include "dikf/errors.hpp"
#include "dikf/kernels.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dikf;
using testutil::fd_grad;
using testutil::randn;

TEST_CASE("kernel_matrix reproduces hand-computed Gaussian values") {
  Matrix x1(2, 1), x2(2, 1);
  x1 << 0.0, 0.0;
  x2 << 1.0, 1.0;
  const KernelConfig cfg{KernelFamily::gaussian, 0.5};
  const Matrix k = kernel_matrix(x1, x2, cfg);
  // exp(-0.5 * 2)
  CHECK(k(0, 0) == doctest::Approx(0.36787944117144233).epsilon(1e-14));

  Matrix x(2, 4);
  x << 0.0, 1.0, 2.0, 3.5, 1.0, -1.0, 0.5, 0.0;
  const KernelConfig cfg2{KernelFamily::gaussian, 0.3};
  const Matrix k2 = kernel_matrix(x, x, cfg2);
  CHECK(k2(0, 1) == doctest::Approx(0.22313016014842982).epsilon(1e-14));
}

TEST_CASE("kernel_matrix is a proper Gaussian Gram block") {
  std::mt19937_64 rng(11);
  const Matrix x = randn(3, 8, rng);
  const KernelConfig cfg{KernelFamily::gaussian, 0.7};
  const Matrix k = kernel_matrix(x, x, cfg);

  for (Index i = 0; i < k.rows(); ++i) {
    CHECK(k(i, i) == doctest::Approx(1.0).epsilon(1e-12));
    for (Index j = 0; j < k.cols(); ++j) {
      CHECK(k(i, j) > 0.0);
      CHECK(k(i, j) <= 1.0 + 1e-15);
      CHECK(k(i, j) == doctest::Approx(k(j, i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("kernel_matrix validates input") {
  std::mt19937_64 rng(12);
  const Matrix x1 = randn(3, 4, rng);
  const Matrix x2 = randn(2, 4, rng);
  const KernelConfig cfg{KernelFamily::gaussian, 1.0};
  CHECK_THROWS_AS(kernel_matrix(x1, x2, cfg), DimensionError);
  CHECK_THROWS_AS(kernel_matrix(x1, x1, KernelConfig{KernelFamily::gaussian, 0.0}),
                  ConfigError);
  CHECK_THROWS_AS(kernel_matrix(x1, x1, KernelConfig{KernelFamily::gaussian, -2.0}),
                  ConfigError);
}

TEST_CASE("kernel_grad_contract matches finite differences in the second argument") {
  std::mt19937_64 rng(13);
  const Matrix x1 = randn(3, 5, rng);
  const Matrix x2 = randn(3, 4, rng);
  const Matrix w = randn(5, 4, rng);
  const double gamma = 0.6;
  const KernelConfig cfg{KernelFamily::gaussian, gamma};

  const Matrix k = kernel_matrix(x1, x2, cfg);
  const Matrix got = kernel_grad_contract(x1, x2, k, gamma, w);

  const auto f = [&](const Matrix& x2v) {
    return (w.array() * kernel_matrix(x1, x2v, cfg).array()).sum();
  };
  const Matrix want = fd_grad(f, x2);
  CHECK(testutil::rel_deviation(got, want) < 1e-7);
}

TEST_CASE("KernelGrad exposes per-entry derivatives consistent with the contraction") {
  std::mt19937_64 rng(14);
  const Matrix x1 = randn(2, 3, rng);
  const Matrix x2 = randn(2, 3, rng);
  const KernelConfig cfg{KernelFamily::gaussian, 0.4};
  const KernelGrad kg(x1, x2, cfg);

  // at(i,j) = 2 gamma k_ij (x1_i - x2_j)
  const Vector v = kg.at(1, 2);
  const Vector want =
      2.0 * 0.4 * kg.kernel()(1, 2) * (x1.col(1) - x2.col(2));
  CHECK((v - want).cwiseAbs().maxCoeff() < 1e-14);

  // contract(W) = sum_ij W_ij at(i,j) placed in column j
  const Matrix w = randn(3, 3, rng);
  Matrix manual = Matrix::Zero(2, 3);
  for (Index j = 0; j < 3; ++j) {
    for (Index i = 0; i < 3; ++i) manual.col(j) += w(i, j) * kg.at(i, j);
  }
  CHECK((kg.contract(w) - manual).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(kg.at(5, 0), DimensionError);
}

TEST_CASE("kernel_grad_contract validates shapes") {
  std::mt19937_64 rng(15);
  const Matrix x1 = randn(2, 3, rng);
  const Matrix x2 = randn(2, 4, rng);
  const Matrix k = kernel_matrix(x1, x2, KernelConfig{});
  CHECK_THROWS_AS(kernel_grad_contract(x1, x2, k, 1.0, Matrix::Zero(2, 4)),
                  DimensionError);
  CHECK_THROWS_AS(kernel_grad_contract(x1, x2, Matrix::Zero(4, 3), 1.0,
                                       Matrix::Zero(4, 3)),
                  DimensionError);
}
