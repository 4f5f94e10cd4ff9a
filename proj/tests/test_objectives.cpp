#include <cmath>
#include <random>

#include "dikf/errors.hpp"
#include "dikf/memory.hpp"
#include "dikf/objectives.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dikf;
using testutil::cycling_targets;
using testutil::fd_grad;
using testutil::randn;
using testutil::rel_deviation;

namespace {

// The small instance frozen against an independent implementation.
Matrix oracle_phi() {
  Matrix phi(2, 4);
  phi << 0.5, -1.0, 2.0, 0.25, 1.5, 0.5, -0.5, -1.0;
  return phi;
}

Targets oracle_targets() {
  Targets t;
  t.y.resize(4, 2);
  t.y << 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0;
  t.encoding = TargetEncoding::one_hot;
  return t;
}

Matrix oracle_x() {
  Matrix x(2, 4);
  x << 0.0, 1.0, 2.0, 3.5, 1.0, -1.0, 0.5, 0.0;
  return x;
}

}  // namespace

TEST_CASE("di reproduces the frozen oracle values") {
  const Matrix phi = oracle_phi();
  const Targets t = oracle_targets();
  CHECK(centered_target_norm2(t.y) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(di(phi, t, DIConfig{0.1}) ==
        doctest::Approx(1.934376636220839).epsilon(1e-12));
  CHECK(di(phi, t, DIConfig{0.0}) ==
        doctest::Approx(1.997955010224949).epsilon(1e-12));
}

TEST_CASE("mrlse is exactly the gap to the centered target norm") {
  const Matrix phi = oracle_phi();
  const Targets t = oracle_targets();
  const DIConfig cfg{0.1};
  // Same code path on both sides: the identity holds bitwise.
  CHECK(mrlse(phi, t, cfg) == centered_target_norm2(t.y) - di(phi, t, cfg));
}

TEST_CASE("di respects its bounds and is non-increasing in rho") {
  std::mt19937_64 rng(41);
  const double rhos[] = {0.0, 1e-4, 1e-2, 1.0};
  for (int trial = 0; trial < 100; ++trial) {
    const Index j = 2 + trial % 4;
    const Index n = 5 + trial % 7;
    const Matrix phi = randn(j, n, rng, 1.0 + trial % 3);
    const Targets t = cycling_targets(n, 2 + trial % 2);
    const double upper = centered_target_norm2(t.y);

    double prev = std::numeric_limits<double>::infinity();
    for (const double rho : rhos) {
      const double v = di(phi, t, DIConfig{rho});
      CHECK(v >= 0.0);       // exact: the implementation clamps round-off
      CHECK(v <= upper);     // exact for the same reason
      CHECK(v <= prev + 1e-10);
      prev = v;
    }
  }
}

TEST_CASE("di equals the discriminant analysis optimum on the linear Gram matrix") {
  // Feature-space DI and Gram-space DCA are the same quantity.
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix phi = randn(3, 8, rng);
    const Targets t = cycling_targets(8, 2);
    const Matrix k = phi.transpose() * phi;
    for (const double rho : {1e-4, 1e-1}) {
      const double a = di(phi, t, DIConfig{rho});
      const double b = kdca_oracle(k, t, DIConfig{rho});
      CHECK(a == doctest::Approx(b).epsilon(1e-8));
    }
  }
}

TEST_CASE("kdca_oracle reproduces the frozen oracle value") {
  const Matrix x = oracle_x();
  const Targets t = oracle_targets();
  const Matrix k = kernel_matrix(x, x, KernelConfig{KernelFamily::gaussian, 0.3});
  CHECK(kdca_oracle(k, t, DIConfig{1e-2}) ==
        doctest::Approx(1.966531385002125).epsilon(1e-12));
}

TEST_CASE("kdi_from_gram reproduces the frozen linear-kernel value") {
  const Matrix x = oracle_x();
  const Targets t = oracle_targets();
  const Matrix xr = x.leftCols(2);
  const Matrix g = x.transpose() * xr;
  const Matrix b = xr.transpose() * xr;
  CHECK(kdi_from_gram(g, b, t.y, 1e-2) ==
        doctest::Approx(1.616118683132256).epsilon(1e-12));
}

TEST_CASE("restriction to a representative span can only lose information") {
  // Linear kernel: nys_di over the span of Xr vs di on the raw features.
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 4, n = 12, m = 3;
    const Matrix x = randn(d, n, rng);
    const Matrix xr = randn(d, m, rng);
    const Targets t = cycling_targets(n, 3);
    const double rho = trial % 2 == 0 ? 1e-4 : 1e-2;
    const double restricted =
        kdi_from_gram(x.transpose() * xr, xr.transpose() * xr, t.y, rho);
    const double full = di(x, t, DIConfig{rho});
    CHECK(restricted <= full + 1e-8);
  }
}

TEST_CASE("linear-kernel kdi with full representative set equals raw di") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = randn(3, 9, rng);
    const Targets t = cycling_targets(9, 3);
    const Matrix k = x.transpose() * x;
    for (const double rho : {1e-4, 1e-2}) {
      CHECK(kdi_from_gram(k, k, t.y, rho) ==
            doctest::Approx(di(x, t, DIConfig{rho})).epsilon(1e-8));
    }
  }
}

TEST_CASE("nys_di with all points as representatives matches kdca") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 8; ++trial) {
    const Index n = 8 + trial;
    const Matrix x = randn(3, n, rng);
    const Targets t = cycling_targets(n, 2);
    const KernelConfig kcfg{KernelFamily::gaussian, 0.5};
    const NystromMap map(x, kcfg);
    const DIConfig dicfg{1e-3};
    const double a = nys_di(x, t, map, dicfg);
    const double b = kdca_oracle(kernel_matrix(x, x, kcfg), t, dicfg);
    CHECK(a == doctest::Approx(b).epsilon(1e-6));
  }
}

TEST_CASE("rf_di is di composed with the Fourier map") {
  std::mt19937_64 rng(46);
  const Matrix x = randn(3, 10, rng);
  const Targets t = cycling_targets(10, 2);
  const FourierMap map = init_fourier(KernelConfig{}, 3, 5, 1);
  const DIConfig cfg{1e-4};
  CHECK(rf_di(x, t, map, cfg) == di(rf_features(x, map), t, cfg));
}

TEST_CASE("grad_rf_di matches finite differences") {
  std::mt19937_64 rng(47);
  for (const double rho : {1e-4, 1e-2}) {
    const Matrix x = randn(4, 15, rng);
    const Targets t = cycling_targets(15, 2);
    const FourierMap map = init_fourier(KernelConfig{KernelFamily::gaussian, 0.5},
                                        4, 3, 7);
    const DIConfig cfg{rho};
    const RfDiGrad grad = grad_rf_di(x, t, map, cfg);
    CHECK(grad.value == doctest::Approx(rf_di(x, t, map, cfg)).epsilon(1e-12));

    const Matrix fd_w = fd_grad(
        [&](const Matrix& w) {
          FourierMap m = map;
          m.w = w;
          return rf_di(x, t, m, cfg);
        },
        map.w);
    CHECK(rel_deviation(grad.dw, fd_w) < 1e-6);

    const Matrix fd_p = fd_grad(
        [&](const Matrix& p) {
          FourierMap m = map;
          m.phase = p.col(0);
          return rf_di(x, t, m, cfg);
        },
        Matrix(map.phase));
    CHECK(rel_deviation(Matrix(grad.dphase), fd_p) < 1e-6);
  }
}

TEST_CASE("grad_nys_di matches finite differences") {
  std::mt19937_64 rng(48);
  for (const double rho : {1e-4, 1e-2}) {
    const Matrix x = randn(4, 15, rng);
    const Targets t = cycling_targets(15, 3);
    const NystromMap map(randn(4, 3, rng),
                         KernelConfig{KernelFamily::gaussian, 0.7});
    const DIConfig cfg{rho};
    const NysDiGrad grad = grad_nys_di(x, t, map, cfg);
    CHECK(grad.value == doctest::Approx(nys_di(x, t, map, cfg)).epsilon(1e-12));

    const Matrix fd = fd_grad(
        [&](const Matrix& p) { return nys_di(x, t, map.with_points(p), cfg); },
        map.points());
    CHECK(rel_deviation(grad.dpoints, fd) < 1e-6);
  }
}

TEST_CASE("grad_nys_di stays finite when representative points coincide") {
  std::mt19937_64 rng(49);
  const Matrix x = randn(3, 12, rng);
  const Targets t = cycling_targets(12, 2);
  Matrix points = randn(3, 4, rng);
  points.col(2) = points.col(0);  // rank-deficient base block
  const NystromMap map(points, KernelConfig{KernelFamily::gaussian, 1.0});
  const NysDiGrad grad = grad_nys_di(x, t, map, DIConfig{1e-4});
  CHECK(grad.dpoints.allFinite());
  CHECK(std::isfinite(grad.value));

  // The gradient still matches finite differences of the pinv objective.
  const Matrix fd = fd_grad(
      [&](const Matrix& p) {
        return nys_di(x, t, map.with_points(p), DIConfig{1e-4});
      },
      points);
  CHECK(rel_deviation(grad.dpoints, fd) < 1e-5);
}

TEST_CASE("gradient evaluations account their temporaries") {
  std::mt19937_64 rng(50);
  const Matrix x = randn(3, 10, rng);
  const Targets t = cycling_targets(10, 2);
  MemLedger ledger;

  const NystromMap map(randn(3, 4, rng), KernelConfig{});
  grad_nys_di(x, t, map, DIConfig{1e-4}, &ledger);
  CHECK(ledger.peak_floats > 0);
  CHECK(ledger.current_floats == 0);  // everything released at scope exit

  ledger.reset();
  const FourierMap fmap = init_fourier(KernelConfig{}, 3, 4, 0);
  grad_rf_di(x, t, fmap, DIConfig{1e-4}, &ledger);
  CHECK(ledger.peak_floats > 0);
  CHECK(ledger.current_floats == 0);
}

TEST_CASE("objectives validate their inputs") {
  const Matrix phi = oracle_phi();
  const Targets t = oracle_targets();
  CHECK_THROWS_AS(di(phi, t, DIConfig{-1.0}), ConfigError);

  Targets wrong = t;
  wrong.y.conservativeResize(3, 2);
  CHECK_THROWS_AS(di(phi, wrong, DIConfig{0.1}), DimensionError);

  CHECK_THROWS_AS(kdi_from_gram(Matrix::Zero(4, 2), Matrix::Zero(3, 3),
                                t.y, 1e-4),
                  DimensionError);
}
