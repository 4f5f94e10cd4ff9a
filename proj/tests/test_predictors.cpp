#include <random>

#include "dikf/errors.hpp"
#include "dikf/objectives.hpp"
#include "dikf/predictors.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dikf;
using testutil::cycling_targets;
using testutil::randn;

namespace {

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

}  // namespace

TEST_CASE("krr_fit reproduces the frozen closed-form solution") {
  const Matrix phi = oracle_phi();
  const Targets t = oracle_targets();
  const KRRModel model = krr_fit(phi, t, DIConfig{0.1});
  CHECK(model.w(0, 0) == doctest::Approx(0.43865262667985344).epsilon(1e-12));
  CHECK(model.w(1, 0) == doctest::Approx(0.33917039967421025).epsilon(1e-12));
  CHECK(model.w(0, 1) == doctest::Approx(-0.43865262667985344).epsilon(1e-12));
  CHECK(model.b(0) == doctest::Approx(0.26569317586828783).epsilon(1e-12));
  CHECK(model.b(1) == doctest::Approx(0.7343068241317121).epsilon(1e-12));
  CHECK(krr_objective(model, phi, t.y) ==
        doctest::Approx(0.06562336377916107).epsilon(1e-12));
}

TEST_CASE("the fitted objective equals mrlse through an independent route") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const Index j = 2 + trial % 4;
    const Index n = j + 3 + trial % 5;
    const Matrix phi = randn(j, n, rng);
    const Targets t = cycling_targets(n, 2 + trial % 3);
    const DIConfig cfg{trial % 2 == 0 ? 1e-4 : 1e-1};
    const KRRModel model = krr_fit(phi, t, cfg);
    const double direct = krr_objective(model, phi, t.y);
    const double via_di = mrlse(phi, t, cfg);
    CHECK(direct == doctest::Approx(via_di).epsilon(1e-8));
  }
}

TEST_CASE("no perturbation of the fitted weights improves the objective") {
  std::mt19937_64 rng(52);
  const Matrix phi = randn(3, 9, rng);
  const Targets t = cycling_targets(9, 2);
  const DIConfig cfg{1e-2};
  const KRRModel model = krr_fit(phi, t, cfg);
  const double at_fit = krr_objective(model, phi, t.y);
  for (int trial = 0; trial < 5; ++trial) {
    KRRModel moved = model;
    moved.w += randn(3, 2, rng, 1e-3);
    moved.b += randn(2, 1, rng, 1e-3).col(0);
    CHECK(krr_objective(moved, phi, t.y) >= at_fit - 1e-12);
  }
}

TEST_CASE("enough features and no ridge give an exact fit") {
  std::mt19937_64 rng(53);
  const Matrix phi = randn(6, 5, rng);  // J >= N: interpolation regime
  const Targets t = cycling_targets(5, 2);
  const KRRModel model = krr_fit(phi, t, DIConfig{0.0});
  const Matrix scores = krr_predict(model, phi);
  CHECK(mse(scores, t.y) < 1e-16);
}

TEST_CASE("ridge shrinks the weights") {
  std::mt19937_64 rng(54);
  const Matrix phi = randn(3, 12, rng);
  const Targets t = cycling_targets(12, 2);
  const double loose = krr_fit(phi, t, DIConfig{1e-6}).w.norm();
  const double tight = krr_fit(phi, t, DIConfig{10.0}).w.norm();
  CHECK(tight < loose);
}

TEST_CASE("classify takes the row argmax with ties to the lowest index") {
  Matrix scores(3, 3);
  scores << 1.0, 1.0, 0.0,
            0.2, 0.9, 0.9,
           -1.0, -2.0, -0.5;
  const std::vector<int> labels = classify(scores);
  CHECK(labels == std::vector<int>{0, 1, 2});
}

TEST_CASE("mse and accuracy behave on hand inputs") {
  Matrix pred(2, 2), truth(2, 2);
  pred << 1.0, 0.0, 0.0, 1.0;
  truth << 0.0, 0.0, 0.0, 0.0;
  CHECK(mse(pred, truth) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK(accuracy({0, 1, 1, 0}, {0, 1, 0, 0}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(accuracy({0}, {0, 1}), DimensionError);
  CHECK_THROWS_AS(mse(pred, Matrix::Zero(3, 2)), DimensionError);
}

TEST_CASE("krr_predict validates the feature dimension") {
  const KRRModel model{Matrix::Zero(3, 2), Vector::Zero(2), 0.1};
  CHECK_THROWS_AS(krr_predict(model, Matrix::Zero(4, 5)), DimensionError);
}
