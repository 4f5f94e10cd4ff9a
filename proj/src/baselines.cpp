#include "dikf/baselines.hpp"

#include <cmath>

#include "dikf/errors.hpp"
#include "dikf/kernels.hpp"
#include "dikf/numerics.hpp"

namespace dikf {

LinearHead ls_refit(const Matrix& features, const Targets& targets, double rho,
                    const Matrix* metric) {
  const Index n = features.cols();
  if (targets.y.rows() != n) {
    throw DimensionError("ls_refit: samples and targets disagree on N");
  }
  if (n < 2) throw ContractError("ls_refit: need at least two samples");
  if (rho < 0.0 || !std::isfinite(rho)) {
    throw ConfigError("ls_refit: rho must be finite and >= 0");
  }
  if (metric != nullptr &&
      (metric->rows() != features.rows() || metric->cols() != features.rows())) {
    throw DimensionError("ls_refit: metric must be J x J");
  }

  const Matrix fbar = center_cols(features);
  const Matrix ybar = center_rows(targets.y);
  Matrix p = fbar * fbar.transpose();
  if (metric != nullptr) {
    p += rho * (*metric);
  } else {
    p.diagonal().array() += rho;
  }
  p = ((p + p.transpose()) * 0.5).eval();

  LinearHead head;
  head.w = PsdPinvSolver(p).solve(fbar * ybar);
  head.b = targets.y.colwise().mean().transpose() -
           head.w.transpose() * features.rowwise().mean();
  return head;
}

double ridge_loss(const Matrix& features, const LinearHead& head,
                  const Matrix& y, double rho) {
  Matrix scores = features.transpose() * head.w;
  scores.rowwise() += head.b.transpose();
  return (scores - y).squaredNorm() + rho * head.w.squaredNorm();
}

double ridge_loss_metric(const Matrix& features, const LinearHead& head,
                         const Matrix& y, double rho, const Matrix& metric) {
  Matrix scores = features.transpose() * head.w;
  scores.rowwise() += head.b.transpose();
  return (scores - y).squaredNorm() +
         rho * (head.w.transpose() * metric * head.w).trace();
}

double softmax_ce(const Matrix& logits, const std::vector<int>& labels) {
  const Index n = logits.rows();
  if (static_cast<Index>(labels.size()) != n) {
    throw DimensionError("softmax_ce: label count mismatch");
  }
  if (n < 1) throw ContractError("softmax_ce: empty batch");
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= logits.cols()) {
      throw ContractError("softmax_ce: label out of range");
    }
    const double m = logits.row(i).maxCoeff();
    const double lse =
        m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, c);
  }
  return total / static_cast<double>(n);
}

Matrix softmax_ce_grad(const Matrix& logits, const std::vector<int>& labels) {
  const Index n = logits.rows();
  if (static_cast<Index>(labels.size()) != n) {
    throw DimensionError("softmax_ce_grad: label count mismatch");
  }
  Matrix grad(n, logits.cols());
  for (Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::ArrayXd e = (logits.row(i).array() - m).exp();
    grad.row(i) = (e / e.sum()).matrix();
  }
  for (Index i = 0; i < n; ++i) {
    grad(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  return grad / static_cast<double>(n);
}

namespace {

std::vector<int> gather_labels(const Dataset& data,
                               const std::vector<Index>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (Index i : idx) {
    out.push_back(data.labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

void check_baseline_data(const Dataset& data, Index input_dim,
                         const char* op) {
  if (data.dim() != input_dim) {
    throw DimensionError(std::string(op) + ": map and data dimension mismatch");
  }
  if (data.n_samples() < 2) {
    throw ContractError(std::string(op) + ": need at least two samples");
  }
}

}  // namespace

std::tuple<NystromMap, LinearHead, TrainReport> train_ls(const Dataset& data,
                                                         const NystromMap& map,
                                                         const TrainConfig& cfg,
                                                         const DIConfig& dicfg) {
  validate(dicfg);
  check_baseline_data(data, map.input_dim(), "train_ls");
  const Index batch = effective_batch_size(map.size(), cfg, data.n_samples());
  const double gamma = map.kernel().gamma;

  NystromMap current = map;
  std::vector<Matrix> params = {map.points()};
  AdamState state = AdamState::like(params);
  LinearHead head;

  auto step = [&](const std::vector<Index>& idx, double lr,
                  MemLedger* ledger) {
    MemScope scope(ledger);
    const Matrix xb = gather_cols(data.x, idx);
    const Targets tb = targets_for(data, idx);
    const Matrix& xr = current.points();

    Matrix g = kernel_matrix(xb, xr, current.kernel());  // Nb x n
    Matrix b = kernel_matrix(xr, xr, current.kernel());  // n x n
    scope.note(g);
    scope.note(b);

    head = ls_refit(g.transpose(), tb, dicfg.rho, &b);

    // Map step against the ridge loss with the head held fixed.
    Matrix resid = g * head.w - tb.y;
    resid.rowwise() += head.b.transpose();
    scope.note(resid);
    const Matrix wg = 2.0 * (resid * head.w.transpose());  // d loss / d G
    const Matrix wb = dicfg.rho * (head.w * head.w.transpose());
    Matrix dpoints = kernel_grad_contract(xb, xr, g, gamma, wg) +
                     2.0 * kernel_grad_contract(xr, xr, b, gamma, wb);
    scope.note(dpoints);
    dpoints = -dpoints;  // schedule maximizes; ridge loss descends
    adam_step(params, {dpoints}, state, cfg, lr);
    current = current.with_points(params[0]);

    const Matrix g2 =
        kernel_matrix(xb, current.points(), current.kernel());
    const Matrix b2 =
        kernel_matrix(current.points(), current.points(), current.kernel());
    return -ridge_loss_metric(g2.transpose(), head, tb.y, dicfg.rho, b2);
  };

  TrainReport report = detail::run_schedule(data.n_samples(), batch, cfg, step);

  // Head consistent with the final map, fitted on the whole training set.
  std::vector<Index> all(static_cast<std::size_t>(data.n_samples()));
  for (Index i = 0; i < data.n_samples(); ++i) {
    all[static_cast<std::size_t>(i)] = i;
  }
  const Matrix g_full =
      kernel_matrix(data.x, current.points(), current.kernel());
  const Matrix b_full =
      kernel_matrix(current.points(), current.points(), current.kernel());
  head = ls_refit(g_full.transpose(), targets_for(data, all), dicfg.rho,
                  &b_full);
  return {std::move(current), std::move(head), std::move(report)};
}

std::tuple<FourierMap, LinearHead, TrainReport> train_ls(const Dataset& data,
                                                         const FourierMap& map,
                                                         const TrainConfig& cfg,
                                                         const DIConfig& dicfg) {
  validate(dicfg);
  check_baseline_data(data, map.input_dim(), "train_ls");
  const Index batch =
      effective_batch_size(map.feature_dim(), cfg, data.n_samples());
  const Index j = map.feature_dim();
  const double scale = std::sqrt(2.0 / static_cast<double>(j));

  FourierMap current = map;
  std::vector<Matrix> params = {map.w, map.phase};
  AdamState state = AdamState::like(params);
  LinearHead head;

  auto step = [&](const std::vector<Index>& idx, double lr,
                  MemLedger* ledger) {
    MemScope scope(ledger);
    const Matrix xb = gather_cols(data.x, idx);
    const Targets tb = targets_for(data, idx);

    Matrix z = current.w.transpose() * xb;  // J x Nb
    z.colwise() += current.phase;
    scope.note(z);
    const Matrix phi = (scale * z.array().cos()).matrix();
    scope.note(phi);

    head = ls_refit(phi, tb, dicfg.rho);

    Matrix resid = phi.transpose() * head.w - tb.y;  // Nb x L
    resid.rowwise() += head.b.transpose();
    scope.note(resid);
    Matrix gz = 2.0 * (head.w * resid.transpose());  // d loss / d Phi
    gz.array() *= (-scale) * z.array().sin();
    scope.note(gz);
    Matrix dw = -(xb * gz.transpose());
    Matrix dphase = -gz.rowwise().sum();
    adam_step(params, {dw, dphase}, state, cfg, lr);
    current.w = params[0];
    current.phase = params[1].col(0);

    return -ridge_loss(rf_features(xb, current), head, tb.y, dicfg.rho);
  };

  TrainReport report = detail::run_schedule(data.n_samples(), batch, cfg, step);

  std::vector<Index> all(static_cast<std::size_t>(data.n_samples()));
  for (Index i = 0; i < data.n_samples(); ++i) {
    all[static_cast<std::size_t>(i)] = i;
  }
  head = ls_refit(rf_features(data.x, current), targets_for(data, all),
                  dicfg.rho);
  return {std::move(current), std::move(head), std::move(report)};
}

std::tuple<NystromMap, LinearHead, TrainReport> train_ce(const Dataset& data,
                                                         const NystromMap& map,
                                                         const TrainConfig& cfg) {
  if (!data.classification()) {
    throw ConfigError("train_ce: cross-entropy needs class labels");
  }
  check_baseline_data(data, map.input_dim(), "train_ce");
  const Index batch = effective_batch_size(map.size(), cfg, data.n_samples());
  const double gamma = map.kernel().gamma;
  const Index n_pts = map.size();
  const Index classes = data.class_count;

  NystromMap current = map;
  std::vector<Matrix> params = {map.points(), Matrix::Zero(n_pts, classes),
                                Matrix::Zero(classes, 1)};
  AdamState state = AdamState::like(params);

  auto step = [&](const std::vector<Index>& idx, double lr,
                  MemLedger* ledger) {
    MemScope scope(ledger);
    const Matrix xb = gather_cols(data.x, idx);
    const std::vector<int> labels = gather_labels(data, idx);
    const Matrix& xr = current.points();
    const Matrix& w = params[1];

    Matrix g = kernel_matrix(xb, xr, current.kernel());  // Nb x n
    scope.note(g);
    Matrix logits = g * w;
    logits.rowwise() += params[2].col(0).transpose();
    scope.note(logits);

    const Matrix go = softmax_ce_grad(logits, labels);  // Nb x L
    Matrix dw = -(g.transpose() * go);
    Matrix db = -(go.colwise().sum().transpose());
    const Matrix wg = go * w.transpose();  // d CE / d G
    Matrix dpoints = -kernel_grad_contract(xb, xr, g, gamma, wg);
    scope.note(dpoints);

    adam_step(params, {dpoints, dw, db}, state, cfg, lr);
    current = current.with_points(params[0]);

    Matrix logits2 =
        kernel_matrix(xb, current.points(), current.kernel()) * params[1];
    logits2.rowwise() += params[2].col(0).transpose();
    return -softmax_ce(logits2, labels);
  };

  TrainReport report = detail::run_schedule(data.n_samples(), batch, cfg, step);
  LinearHead head{params[1], params[2].col(0)};
  return {std::move(current), std::move(head), std::move(report)};
}

std::tuple<FourierMap, LinearHead, TrainReport> train_ce(const Dataset& data,
                                                         const FourierMap& map,
                                                         const TrainConfig& cfg) {
  if (!data.classification()) {
    throw ConfigError("train_ce: cross-entropy needs class labels");
  }
  check_baseline_data(data, map.input_dim(), "train_ce");
  const Index batch =
      effective_batch_size(map.feature_dim(), cfg, data.n_samples());
  const Index j = map.feature_dim();
  const Index classes = data.class_count;
  const double scale = std::sqrt(2.0 / static_cast<double>(j));

  FourierMap current = map;
  std::vector<Matrix> params = {map.w, map.phase, Matrix::Zero(j, classes),
                                Matrix::Zero(classes, 1)};
  AdamState state = AdamState::like(params);

  auto step = [&](const std::vector<Index>& idx, double lr,
                  MemLedger* ledger) {
    MemScope scope(ledger);
    const Matrix xb = gather_cols(data.x, idx);
    const std::vector<int> labels = gather_labels(data, idx);
    const Matrix& w = params[2];

    Matrix z = current.w.transpose() * xb;
    z.colwise() += current.phase;
    scope.note(z);
    const Matrix phi = (scale * z.array().cos()).matrix();
    scope.note(phi);
    Matrix logits = phi.transpose() * w;
    logits.rowwise() += params[3].col(0).transpose();
    scope.note(logits);

    const Matrix go = softmax_ce_grad(logits, labels);
    Matrix dw_head = -(phi * go);
    Matrix db = -(go.colwise().sum().transpose());
    Matrix gz = w * go.transpose();  // d CE / d Phi
    gz.array() *= (-scale) * z.array().sin();
    scope.note(gz);
    Matrix dw_map = -(xb * gz.transpose());
    Matrix dphase = -gz.rowwise().sum();

    adam_step(params, {dw_map, dphase, dw_head, db}, state, cfg, lr);
    current.w = params[0];
    current.phase = params[1].col(0);

    Matrix logits2 = rf_features(xb, current).transpose() * params[2];
    logits2.rowwise() += params[3].col(0).transpose();
    return -softmax_ce(logits2, labels);
  };

  TrainReport report = detail::run_schedule(data.n_samples(), batch, cfg, step);
  LinearHead head{params[2], params[3].col(0)};
  return {std::move(current), std::move(head), std::move(report)};
}

}  // namespace dikf
