#include <cmath>
#include <set>

#include "dikf/data_io.hpp"
#include "dikf/errors.hpp"
#include "dikf/training.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dikf;

TEST_CASE("adam_step takes unit-scale steps under a constant gradient") {
  // With g = 1 everywhere, the bias-corrected moments are exactly 1 and
  // every step moves by lr/(1 + eps).
  TrainConfig cfg;
  std::vector<Matrix> params = {Matrix::Zero(1, 1)};
  std::vector<Matrix> grads = {Matrix::Ones(1, 1)};
  AdamState state = AdamState::like(params);
  const double lr = 0.05;
  for (int t = 1; t <= 4; ++t) {
    adam_step(params, grads, state, cfg, lr);
    const double want = t * lr / (1.0 + cfg.adam_eps);
    CHECK(params[0](0, 0) == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(state.t == 4);
}

TEST_CASE("adam_step ascends the sign of the gradient") {
  TrainConfig cfg;
  std::vector<Matrix> params = {Matrix::Zero(2, 1)};
  std::vector<Matrix> grads = {Matrix(2, 1)};
  grads[0] << 3.0, -0.5;
  AdamState state = AdamState::like(params);
  adam_step(params, grads, state, cfg, 0.1);
  CHECK(params[0](0, 0) > 0.0);
  CHECK(params[0](1, 0) < 0.0);
  CHECK_THROWS_AS(
      adam_step(params, {Matrix::Zero(3, 1)}, state, cfg, 0.1),
      DimensionError);
}

TEST_CASE("epoch_mean_update folds into the arithmetic mean") {
  double mu = 0.0;
  mu = epoch_mean_update(mu, 1, 3.0);
  CHECK(mu == doctest::Approx(3.0));
  mu = epoch_mean_update(mu, 2, 5.0);
  CHECK(mu == doctest::Approx(4.0));
  mu = epoch_mean_update(mu, 3, 7.0);
  CHECK(mu == doctest::Approx(5.0));
  CHECK_THROWS_AS(epoch_mean_update(0.0, 0, 1.0), ContractError);
}

TEST_CASE("effective_batch_size applies the dimensionality rule") {
  TrainConfig cfg;  // batch_size 1000
  CHECK(effective_batch_size(400, cfg) == 1000);
  CHECK(effective_batch_size(500, cfg) == 1000);
  CHECK(effective_batch_size(600, cfg) == 1200);   // bumped to 2J
  CHECK(effective_batch_size(1200, cfg) == 2400);  // bump beats batch_size

  TrainConfig big = cfg;
  big.batch_size = 4000;
  CHECK(effective_batch_size(600, big) == 4000);  // batch_size already larger

  TrainConfig small = cfg;
  small.batch_size = 300;
  CHECK_THROWS_AS(effective_batch_size(450, small), ConfigError);  // <= J
  CHECK_THROWS_AS(effective_batch_size(400, cfg, Index{900}), ConfigError);
  CHECK(effective_batch_size(400, cfg, Index{1000}) == 1000);
}

TEST_CASE("run_schedule decays on the first saturation and stops on the second") {
  TrainConfig cfg;
  cfg.batch_size = 5;
  cfg.max_epochs = 50;
  cfg.lr0 = 1.0;
  cfg.lr_decay = 0.1;
  // Scripted objective: rises for 3 epochs, then plateaus twice.
  const std::vector<double> script = {1.0, 2.0, 3.0, 3.0005, 3.0006, 3.0007};
  Index calls = 0;
  auto step = [&](const std::vector<Index>&, double, MemLedger*) {
    const Index epoch = calls++;
    return script[std::min<Index>(epoch, script.size() - 1)];
  };
  const TrainReport report = detail::run_schedule(5, 5, cfg, step);

  REQUIRE(report.epochs.size() == 5);  // plateau at epoch 3 decays, 4 stops
  CHECK(report.stop_reason == StopReason::converged);
  REQUIRE(report.lr_changes.size() == 1);
  CHECK(report.lr_changes[0].epoch == 3);
  CHECK(report.lr_changes[0].lr == doctest::Approx(0.1));
  CHECK(report.epochs[3].lr == doctest::Approx(1.0));  // decay applies after
  CHECK(report.epochs[4].lr == doctest::Approx(0.1));
}

TEST_CASE("run_schedule recovers from one saturation if improvement resumes") {
  TrainConfig cfg;
  cfg.batch_size = 2;
  cfg.max_epochs = 6;
  const std::vector<double> script = {1.0, 1.0001, 2.0, 3.0, 4.0, 5.0};
  Index epoch = 0;
  Index batch_in_epoch = 0;
  auto step = [&](const std::vector<Index>&, double, MemLedger*) {
    const double v = script[epoch];
    if (++batch_in_epoch == 2) {  // 4 samples / batch 2 = 2 batches per epoch
      batch_in_epoch = 0;
      ++epoch;
    }
    return v;
  };
  const TrainReport report = detail::run_schedule(4, 2, cfg, step);
  CHECK(report.epochs.size() == 6);
  CHECK(report.stop_reason == StopReason::max_epochs);
  CHECK(report.lr_changes.size() == 1);  // decayed once, then kept improving
}

TEST_CASE("run_schedule reports each epoch's running mean") {
  TrainConfig cfg;
  cfg.batch_size = 2;
  cfg.max_epochs = 1;
  double value = 0.0;
  auto step = [&](const std::vector<Index>& batch, double, MemLedger*) {
    REQUIRE(batch.size() == 2);  // full batches only
    return value += 1.0;        // batch values 1, 2, 3
  };
  const TrainReport report = detail::run_schedule(7, 2, cfg, step);  // 3 batches
  REQUIRE(report.epochs.size() == 1);
  CHECK(report.epochs[0].mu == doctest::Approx(2.0));  // mean of 1,2,3
}

TEST_CASE("run_schedule rejects non-finite objectives") {
  TrainConfig cfg;
  cfg.batch_size = 2;
  auto step = [&](const std::vector<Index>&, double, MemLedger*) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(detail::run_schedule(4, 2, cfg, step), NumericalError);
}

TEST_CASE("train_nystrom raises the discriminant objective on blobs") {
  BlobsConfig bc;
  bc.dim = 4;
  bc.classes = 3;
  bc.n_samples = 240;
  bc.separation = 2.5;
  bc.seed = 8;
  Dataset data = make_blobs(bc);
  minmax_scale(data);

  const KernelConfig kcfg{KernelFamily::gaussian, 2.0};
  const DIConfig dicfg{1e-4};
  const NystromMap init = init_nystrom(data, 6, kcfg, 1);

  TrainConfig cfg;
  cfg.batch_size = 80;
  cfg.max_epochs = 12;
  cfg.lr0 = 1e-2;
  cfg.seed = 3;
  const auto [trained, report] = train_nystrom(data, init, cfg, dicfg);

  REQUIRE(!report.epochs.empty());
  CHECK(report.epochs.back().mu > report.epochs.front().mu);
  CHECK(report.peak_step_floats > 0);
  CHECK(report.wall_seconds > 0.0);
  // The map object really moved.
  CHECK((trained.points() - init.points()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("train_fourier raises the discriminant objective on blobs") {
  BlobsConfig bc;
  bc.dim = 4;
  bc.classes = 2;
  bc.n_samples = 240;
  bc.separation = 2.5;
  bc.seed = 9;
  Dataset data = make_blobs(bc);
  minmax_scale(data);

  const KernelConfig kcfg{KernelFamily::gaussian, 2.0};
  const FourierMap init = init_fourier(kcfg, data.dim(), 8, 2);

  TrainConfig cfg;
  cfg.batch_size = 80;
  cfg.max_epochs = 12;
  cfg.lr0 = 1e-2;
  cfg.seed = 3;
  const auto [trained, report] = train_fourier(data, init, cfg, DIConfig{1e-4});

  REQUIRE(!report.epochs.empty());
  CHECK(report.epochs.back().mu > report.epochs.front().mu);
  CHECK((trained.w - init.w).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("training is deterministic under a fixed seed") {
  BlobsConfig bc;
  bc.dim = 3;
  bc.classes = 2;
  bc.n_samples = 120;
  bc.seed = 10;
  Dataset data = make_blobs(bc);
  minmax_scale(data);

  const KernelConfig kcfg{KernelFamily::gaussian, 1.0};
  TrainConfig cfg;
  cfg.batch_size = 40;
  cfg.max_epochs = 3;
  cfg.seed = 5;
  const NystromMap init = init_nystrom(data, 5, kcfg, 5);
  const auto [a, ra] = train_nystrom(data, init, cfg, DIConfig{1e-4});
  const auto [b, rb] = train_nystrom(data, init, cfg, DIConfig{1e-4});
  CHECK((a.points() - b.points()).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(ra.epochs.size() == rb.epochs.size());
  for (std::size_t i = 0; i < ra.epochs.size(); ++i) {
    CHECK(ra.epochs[i].mu == rb.epochs[i].mu);
  }
}

TEST_CASE("training configs are validated") {
  TrainConfig cfg;
  cfg.lr_decay = 1.5;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.max_epochs = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.lr0 = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}
