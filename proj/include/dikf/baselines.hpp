#pragma once

#include <tuple>

#include "dikf/data_io.hpp"
#include "dikf/feature_maps.hpp"
#include "dikf/training.hpp"
#include "dikf/types.hpp"

namespace dikf {

/// Linear model on top of a feature map: scores = F^T w + 1 b^T, where F is
/// the map's raw feature block (Fourier features, or the landmark kernel
/// columns k(x, Xr) for a Nystrom map).
struct LinearHead {
  Matrix w;  // J x L
  Vector b;  // L
};

/// Alternating least-squares baseline: per batch, (1) closed-form refit of
/// the ridge head on the current batch features, (2) one Adam step on the
/// map parameters against the ridge loss with the head fixed. For Nystrom
/// maps the head lives on the landmark features with the k(Xr,Xr) ridge
/// metric, which makes the per-batch refit attain the batch mrlse exactly.
/// The reported objective is the negative ridge loss (larger is better).
std::tuple<NystromMap, LinearHead, TrainReport> train_ls(const Dataset& data,
                                                         const NystromMap& map,
                                                         const TrainConfig& cfg,
                                                         const DIConfig& dicfg);
std::tuple<FourierMap, LinearHead, TrainReport> train_ls(const Dataset& data,
                                                         const FourierMap& map,
                                                         const TrainConfig& cfg,
                                                         const DIConfig& dicfg);

/// Joint softmax cross-entropy baseline: Adam descent on head and map
/// parameters together, log-sum-exp stabilized, head initialized at zero.
/// The reported objective is the negative mean cross-entropy.
std::tuple<NystromMap, LinearHead, TrainReport> train_ce(const Dataset& data,
                                                         const NystromMap& map,
                                                         const TrainConfig& cfg);
std::tuple<FourierMap, LinearHead, TrainReport> train_ce(const Dataset& data,
                                                         const FourierMap& map,
                                                         const TrainConfig& cfg);

/// Closed-form ridge-head refit the LS baseline runs per batch: features F
/// are J x N feature columns, the head minimizes ||F^T w + 1 b^T - Y||^2 +
/// rho * penalty with penalty ||w||^2 (metric == nullptr) or w^T metric w.
LinearHead ls_refit(const Matrix& features, const Targets& targets, double rho,
                    const Matrix* metric = nullptr);

/// Mean softmax cross-entropy of logits (N x L) against labels, and its
/// gradient helper. Exposed for tests.
double softmax_ce(const Matrix& logits, const std::vector<int>& labels);
Matrix softmax_ce_grad(const Matrix& logits, const std::vector<int>& labels);

/// Ridge loss of a head on explicit features: ||F^T w + 1 b^T - Y||^2 +
/// rho * penalty, where penalty is ||w||^2 (identity metric) or
/// w^T B w (landmark metric) depending on the overload.
double ridge_loss(const Matrix& features, const LinearHead& head,
                  const Matrix& y, double rho);
double ridge_loss_metric(const Matrix& features, const LinearHead& head,
                         const Matrix& y, double rho, const Matrix& metric);

}  // namespace dikf
