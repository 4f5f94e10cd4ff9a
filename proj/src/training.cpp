#include "dikf/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "dikf/errors.hpp"

namespace dikf {

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(cfg.lr0 > 0.0) || !std::isfinite(cfg.lr0)) {
    throw ConfigError("train: lr0 must be finite and > 0");
  }
  if (!(cfg.lr_decay > 0.0) || !(cfg.lr_decay < 1.0)) {
    throw ConfigError("train: lr_decay must lie in (0, 1)");
  }
  if (cfg.adam_beta1 < 0.0 || cfg.adam_beta1 >= 1.0 || cfg.adam_beta2 < 0.0 ||
      cfg.adam_beta2 >= 1.0) {
    throw ConfigError("train: Adam betas must lie in [0, 1)");
  }
  if (!(cfg.adam_eps > 0.0)) throw ConfigError("train: Adam eps must be > 0");
  if (!(cfg.saturation_rel_tol > 0.0)) {
    throw ConfigError("train: saturation_rel_tol must be > 0");
  }
  if (cfg.max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
}

AdamState AdamState::like(const std::vector<Matrix>& params) {
  AdamState state;
  state.m.reserve(params.size());
  state.v.reserve(params.size());
  for (const Matrix& p : params) {
    state.m.push_back(Matrix::Zero(p.rows(), p.cols()));
    state.v.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  state.t = 0;
  return state;
}

void adam_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads,
               AdamState& state, const TrainConfig& cfg, double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ContractError("adam_step: parameter/gradient/state count mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, state.t);
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, state.t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i].rows() ||
        grads[i].cols() != params[i].cols()) {
      throw DimensionError("adam_step: gradient shape mismatch");
    }
    state.m[i] = cfg.adam_beta1 * state.m[i] + (1.0 - cfg.adam_beta1) * grads[i];
    state.v[i] = cfg.adam_beta2 * state.v[i] +
                 (1.0 - cfg.adam_beta2) * grads[i].cwiseProduct(grads[i]);
    params[i].array() += lr * (state.m[i].array() / bc1) /
                         ((state.v[i].array() / bc2).sqrt() + cfg.adam_eps);
  }
}

double epoch_mean_update(double mu_prev, Index b, double value) {
  if (b < 1) throw ContractError("epoch_mean_update: batch index is 1-based");
  const double bd = static_cast<double>(b);
  return (bd - 1.0) / bd * mu_prev + value / bd;
}

Index effective_batch_size(Index j, const TrainConfig& cfg,
                           std::optional<Index> n_samples) {
  validate(cfg);
  if (j < 1) throw ConfigError("effective_batch_size: J must be >= 1");
  Index size = cfg.batch_size;
  if (j > 500) size = std::max(size, 2 * j);
  if (size <= j) {
    throw ConfigError("effective_batch_size: batch size " +
                      std::to_string(size) +
                      " must exceed the feature dimension " +
                      std::to_string(j));
  }
  if (n_samples && size > *n_samples) {
    throw ConfigError("effective_batch_size: batch size " +
                      std::to_string(size) + " exceeds the sample count " +
                      std::to_string(*n_samples));
  }
  return size;
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::max_epochs:
      return "max_epochs";
    case StopReason::converged:
      return "converged";
  }
  return "unknown";
}

namespace detail {

TrainReport run_schedule(Index n_samples, Index batch_size,
                         const TrainConfig& cfg, const StepFn& step) {
  validate(cfg);
  if (batch_size < 1 || batch_size > n_samples) {
    throw ConfigError("run_schedule: batch size must lie in [1, N]");
  }

  const auto start = std::chrono::steady_clock::now();
  TrainReport report;
  MemLedger ledger;
  double lr = cfg.lr0;
  double best_mu = -std::numeric_limits<double>::infinity();
  int saturations = 0;

  for (Index epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const auto batches = epoch_batches(n_samples, batch_size, cfg.seed, epoch);
    double mu = 0.0;
    Index b = 0;
    for (const auto& batch : batches) {
      const double value = step(batch, lr, &ledger);
      if (!std::isfinite(value)) {
        throw NumericalError("run_schedule: non-finite batch objective");
      }
      mu = epoch_mean_update(mu, ++b, value);
    }
    report.epochs.push_back({epoch, mu, lr});

    const double floor = std::max(std::abs(best_mu), 1e-12);
    const bool improved =
        !std::isfinite(best_mu) || (mu - best_mu) > cfg.saturation_rel_tol * floor;
    best_mu = std::max(best_mu, mu);
    if (!improved) {
      ++saturations;
      if (saturations >= 2) {
        report.stop_reason = StopReason::converged;
        break;
      }
      lr *= cfg.lr_decay;
      report.lr_changes.push_back({epoch, lr});
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report.peak_step_floats = ledger.peak_floats;
  return report;
}

}  // namespace detail

namespace {

void check_trainable(const Dataset& data, Index input_dim, const char* op) {
  if (data.dim() != input_dim) {
    throw DimensionError(std::string(op) + ": map and data dimension mismatch");
  }
  if (data.n_samples() < 2) {
    throw ContractError(std::string(op) + ": need at least two samples");
  }
}

}  // namespace

std::pair<NystromMap, TrainReport> train_nystrom(const Dataset& data,
                                                 const NystromMap& map,
                                                 const TrainConfig& cfg,
                                                 const DIConfig& dicfg) {
  validate(dicfg);
  check_trainable(data, map.input_dim(), "train_nystrom");
  const Index batch = effective_batch_size(map.size(), cfg, data.n_samples());

  NystromMap current = map;
  std::vector<Matrix> params = {map.points()};
  AdamState state = AdamState::like(params);

  auto step = [&](const std::vector<Index>& idx, double lr,
                  MemLedger* ledger) {
    const Matrix xb = gather_cols(data.x, idx);
    const Targets tb = targets_for(data, idx);
    const NysDiGrad grad = grad_nys_di(xb, tb, current, dicfg, ledger);
    adam_step(params, {grad.dpoints}, state, cfg, lr);
    current = current.with_points(params[0]);
    return nys_di(xb, tb, current, dicfg);
  };

  TrainReport report = detail::run_schedule(data.n_samples(), batch, cfg, step);
  return {std::move(current), std::move(report)};
}

std::pair<FourierMap, TrainReport> train_fourier(const Dataset& data,
                                                 const FourierMap& map,
                                                 const TrainConfig& cfg,
                                                 const DIConfig& dicfg) {
  validate(dicfg);
  check_trainable(data, map.input_dim(), "train_fourier");
  const Index batch =
      effective_batch_size(map.feature_dim(), cfg, data.n_samples());

  FourierMap current = map;
  std::vector<Matrix> params = {map.w, map.phase};
  AdamState state = AdamState::like(params);

  auto step = [&](const std::vector<Index>& idx, double lr,
                  MemLedger* ledger) {
    const Matrix xb = gather_cols(data.x, idx);
    const Targets tb = targets_for(data, idx);
    const RfDiGrad grad = grad_rf_di(xb, tb, current, dicfg, ledger);
    adam_step(params, {grad.dw, Matrix(grad.dphase)}, state, cfg, lr);
    current.w = params[0];
    current.phase = params[1].col(0);
    return rf_di(xb, tb, current, dicfg);
  };

  TrainReport report = detail::run_schedule(data.n_samples(), batch, cfg, step);
  return {std::move(current), std::move(report)};
}

}  // namespace dikf
