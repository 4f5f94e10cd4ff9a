#pragma once

#include <vector>

#include "dikf/objectives.hpp"
#include "dikf/types.hpp"

namespace dikf {

/// Closed-form ridge-regression predictor on explicit features:
/// scores(x) = W^T phi(x) + b.
struct KRRModel {
  Matrix w;  // J x L
  Vector b;  // L
  double rho_used = 0.0;
};

/// Fits the closed-form optimum of
///   min ||Phi^T W + 1 b^T - Y||_F^2 + rho ||W||_F^2.
/// A singular system at rho == 0 falls back to the pseudoinverse path with
/// a warning on stderr.
KRRModel krr_fit(const Matrix& phi, const Targets& targets,
                 const DIConfig& cfg);

/// Phi^T W + 1 b^T for feature columns Phi (J x M); M x L scores.
Matrix krr_predict(const KRRModel& model, const Matrix& phi);

/// The value of the ridge objective at (model.w, model.b); equals
/// mrlse(phi, targets, cfg) at the fitted optimum.
double krr_objective(const KRRModel& model, const Matrix& phi,
                     const Matrix& y);

/// Row-wise argmax; ties break to the lowest class index.
std::vector<int> classify(const Matrix& scores);

double mse(const Matrix& pred, const Matrix& truth);

double accuracy(const std::vector<int>& labels,
                const std::vector<int>& truth_labels);

}  // namespace dikf
