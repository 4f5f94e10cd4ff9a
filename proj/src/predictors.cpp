#include "dikf/predictors.hpp"

#include <cmath>
#include <iostream>

#include "dikf/errors.hpp"
#include "dikf/numerics.hpp"

namespace dikf {

KRRModel krr_fit(const Matrix& phi, const Targets& targets,
                 const DIConfig& cfg) {
  validate(cfg);
  const Index n = phi.cols();
  if (targets.y.rows() != n) {
    throw DimensionError("krr_fit: samples and targets disagree on N");
  }
  if (n < 2) {
    throw ContractError("krr_fit: need at least two samples");
  }

  const Matrix pbar = center_cols(phi);
  const Matrix ybar = center_rows(targets.y);
  const Matrix t = pbar * ybar;  // J x L
  Matrix s = pbar * pbar.transpose();
  s = ((s + s.transpose()) * 0.5).eval();

  KRRModel model;
  model.rho_used = cfg.rho;
  if (cfg.rho > 0.0) {
    model.w = solve_ridge(s, cfg.rho, t);
  } else {
    const PsdPinvSolver solver(s);
    if (solver.rank() < s.rows()) {
      std::cerr << "krr_fit: singular system at rho = 0, "
                   "falling back to the pseudoinverse\n";
    }
    model.w = solver.solve(t);
  }
  // Offset absorbing the means: b = (1/N) (Y^T 1 - W^T Phi 1).
  model.b = targets.y.colwise().mean().transpose() -
            model.w.transpose() * phi.rowwise().mean();
  return model;
}

Matrix krr_predict(const KRRModel& model, const Matrix& phi) {
  if (phi.rows() != model.w.rows()) {
    throw DimensionError("krr_predict: feature dimension mismatch");
  }
  Matrix scores = phi.transpose() * model.w;  // M x L
  scores.rowwise() += model.b.transpose();
  return scores;
}

double krr_objective(const KRRModel& model, const Matrix& phi,
                     const Matrix& y) {
  if (y.rows() != phi.cols()) {
    throw DimensionError("krr_objective: samples and targets disagree on N");
  }
  const Matrix resid = krr_predict(model, phi) - y;
  return resid.squaredNorm() + model.rho_used * model.w.squaredNorm();
}

std::vector<int> classify(const Matrix& scores) {
  std::vector<int> labels(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    scores.row(i).maxCoeff(&best);  // Eigen returns the first maximizer
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

double mse(const Matrix& pred, const Matrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw DimensionError("mse: shape mismatch");
  }
  if (pred.rows() == 0) {
    throw ContractError("mse: empty prediction matrix");
  }
  return (pred - truth).squaredNorm() / static_cast<double>(pred.rows());
}

double accuracy(const std::vector<int>& labels,
                const std::vector<int>& truth_labels) {
  if (labels.size() != truth_labels.size()) {
    throw DimensionError("accuracy: label count mismatch");
  }
  if (labels.empty()) {
    throw ContractError("accuracy: empty label set");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    hits += labels[i] == truth_labels[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace dikf
