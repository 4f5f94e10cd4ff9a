#include "dikf/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "dikf/errors.hpp"
#include "dikf/kernels.hpp"
#include "dikf/numerics.hpp"

namespace dikf {

void validate(const DIConfig& cfg) {
  if (cfg.rho < 0.0 || !std::isfinite(cfg.rho)) {
    throw ConfigError("objective: rho must be finite and >= 0");
  }
}

double centered_target_norm2(const Matrix& y) {
  if (y.rows() < 1) {
    throw ContractError("centered_target_norm2: empty target matrix");
  }
  return center_rows(y).squaredNorm();
}

namespace {

void check_batch(Index n_features_cols, const Targets& targets,
                 const char* op) {
  if (targets.y.rows() != n_features_cols) {
    throw DimensionError(std::string(op) +
                         ": samples and targets disagree on N");
  }
  if (n_features_cols < 2) {
    throw ContractError(std::string(op) + ": need at least two samples");
  }
  if (!targets.y.allFinite()) {
    throw ContractError(std::string(op) + ": non-finite targets");
  }
}

// Shared tail of every discriminant-information evaluation: the raw trace
// is a difference-free sum, but round-off can still push it a hair outside
// the mathematical range, so pin it to [0, upper].
double clamp_to_range(double value, double upper) {
  return std::min(std::max(value, 0.0), upper);
}

}  // namespace

double di(const Matrix& phi, const Targets& targets, const DIConfig& cfg) {
  validate(cfg);
  check_batch(phi.cols(), targets, "di");
  if (!phi.allFinite()) {
    throw ContractError("di: non-finite features");
  }

  const Matrix ybar = center_rows(targets.y);
  const double upper = ybar.squaredNorm();
  const Matrix pbar = center_cols(phi);
  const Matrix t = pbar * ybar;  // J x L
  Matrix s = pbar * pbar.transpose();
  s = ((s + s.transpose()) * 0.5).eval();

  Matrix a;
  if (cfg.rho > 0.0) {
    a = solve_ridge(s, cfg.rho, t);
  } else {
    a = PsdPinvSolver(s).solve(t);
  }
  return clamp_to_range((t.array() * a.array()).sum(), upper);
}

double mrlse(const Matrix& phi, const Targets& targets, const DIConfig& cfg) {
  return centered_target_norm2(targets.y) - di(phi, targets, cfg);
}

double rf_di(const Matrix& xb, const Targets& targets, const FourierMap& map,
             const DIConfig& cfg) {
  return di(rf_features(xb, map), targets, cfg);
}

double kdi_from_gram(const Matrix& g, const Matrix& b, const Matrix& y,
                     double rho, double rank_tol) {
  if (g.rows() != y.rows()) {
    throw DimensionError("kdi_from_gram: Gram block and targets disagree on N");
  }
  if (b.rows() != b.cols() || b.rows() != g.cols()) {
    throw DimensionError("kdi_from_gram: base block must be n x n");
  }
  if (rho < 0.0 || !std::isfinite(rho)) {
    throw ConfigError("kdi_from_gram: rho must be finite and >= 0");
  }

  const Matrix ybar = center_rows(y);
  const double upper = ybar.squaredNorm();
  const Matrix gbar = center_rows(g);
  const Matrix t = gbar.transpose() * ybar;  // n x L
  Matrix p = gbar.transpose() * gbar + rho * b;
  p = ((p + p.transpose()) * 0.5).eval();

  const PsdPinvSolver solver(p, rank_tol);
  const Matrix a = solver.solve(t);
  return clamp_to_range((t.array() * a.array()).sum(), upper);
}

double nys_di(const Matrix& xb, const Targets& targets, const NystromMap& map,
              const DIConfig& cfg) {
  validate(cfg);
  check_batch(xb.cols(), targets, "nys_di");
  if (xb.rows() != map.input_dim()) {
    throw DimensionError("nys_di: input dimension mismatch");
  }
  const Matrix g = kernel_matrix(xb, map.points(), map.kernel());
  const Matrix b = kernel_matrix(map.points(), map.points(), map.kernel());
  return kdi_from_gram(g, b, targets.y, cfg.rho, map.rank_tol());
}

double kdca_oracle(const Matrix& k, const Targets& targets,
                   const DIConfig& cfg) {
  validate(cfg);
  if (k.rows() != k.cols()) {
    throw ContractError("kdca_oracle: kernel matrix must be square");
  }
  check_batch(k.cols(), targets, "kdca_oracle");

  const Matrix ybar = center_rows(targets.y);
  const double upper = ybar.squaredNorm();
  Matrix kbar = center_rows(center_cols(k));
  kbar = ((kbar + kbar.transpose()) * 0.5).eval();

  const EigFactors f = sym_eig(kbar);
  const double lmax = f.values(0);
  const double cutoff =
      default_rank_tol(k.rows(), k.cols()) * std::max(lmax, 0.0);
  const Matrix proj = f.vectors.transpose() * ybar;  // N x L
  double value = 0.0;
  for (Index i = 0; i < f.values.size(); ++i) {
    const double lambda = f.values(i);
    if (lambda <= cutoff || lambda <= 0.0) break;
    value += lambda / (lambda + cfg.rho) * proj.row(i).squaredNorm();
  }
  return clamp_to_range(value, upper);
}

RfDiGrad grad_rf_di(const Matrix& xb, const Targets& targets,
                    const FourierMap& map, const DIConfig& cfg,
                    MemLedger* ledger) {
  validate(cfg);
  check_batch(xb.cols(), targets, "grad_rf_di");
  if (xb.rows() != map.input_dim()) {
    throw DimensionError("grad_rf_di: input dimension mismatch");
  }
  MemScope scope(ledger);

  const Index j = map.feature_dim();
  const double scale = std::sqrt(2.0 / static_cast<double>(j));

  Matrix z = map.w.transpose() * xb;  // J x Nb
  z.colwise() += map.phase;
  scope.note(z);

  Matrix pbar = (scale * z.array().cos()).matrix();
  center_cols_in_place(pbar);
  scope.note(pbar);

  const Matrix ybar = center_rows(targets.y);
  const double upper = ybar.squaredNorm();
  Matrix t = pbar * ybar;  // J x L
  scope.note(t);
  Matrix p = pbar * pbar.transpose();
  p = ((p + p.transpose()) * 0.5).eval();
  scope.note(p);

  Matrix a;  // (P + rho I)^{-1} T, J x L
  if (cfg.rho > 0.0) {
    a = solve_ridge(p, cfg.rho, t);
  } else {
    a = PsdPinvSolver(p).solve(t);
  }
  scope.note(a);

  RfDiGrad out;
  out.value = clamp_to_range((t.array() * a.array()).sum(), upper);

  Matrix resid = ybar.transpose() - a.transpose() * pbar;  // L x Nb
  scope.note(resid);
  Matrix gz = 2.0 * (a * resid);  // d DI / d Pbar, J x Nb
  center_cols_in_place(gz);       // through Phi = Pbar C
  gz.array() *= (-scale) * z.array().sin();  // through cos
  scope.note(gz);

  out.dw.noalias() = xb * gz.transpose();  // d x J
  out.dphase = gz.rowwise().sum();
  scope.note(out.dw);
  scope.note(out.dphase);
  return out;
}

NysDiGrad grad_nys_di(const Matrix& xb, const Targets& targets,
                      const NystromMap& map, const DIConfig& cfg,
                      MemLedger* ledger) {
  validate(cfg);
  check_batch(xb.cols(), targets, "grad_nys_di");
  if (xb.rows() != map.input_dim()) {
    throw DimensionError("grad_nys_di: input dimension mismatch");
  }
  MemScope scope(ledger);

  const Matrix& xr = map.points();
  const double gamma = map.kernel().gamma;

  const Matrix g = kernel_matrix(xb, xr, map.kernel());  // Nb x n
  scope.note(g);
  const Matrix b = kernel_matrix(xr, xr, map.kernel());  // n x n
  scope.note(b);

  Matrix gbar = center_rows(g);
  scope.note(gbar);
  const Matrix ybar = center_rows(targets.y);
  const double upper = ybar.squaredNorm();
  Matrix t = gbar.transpose() * ybar;  // n x L
  scope.note(t);
  Matrix p = gbar.transpose() * gbar + cfg.rho * b;
  p = ((p + p.transpose()) * 0.5).eval();
  scope.note(p);

  const PsdPinvSolver solver(p, map.rank_tol());
  if (solver.rank() == 0) {
    throw RankDeficiencyError(
        "grad_nys_di: objective matrix has numerical rank zero");
  }
  Matrix a = solver.solve(t);  // n x L
  scope.note(a);

  NysDiGrad out;
  out.value = clamp_to_range((t.array() * a.array()).sum(), upper);

  Matrix wg = 2.0 * ((ybar - gbar * a) * a.transpose());  // d DI / d Gbar
  center_rows_in_place(wg);                               // through G -> CG
  scope.note(wg);
  Matrix wb = -cfg.rho * (a * a.transpose());  // d DI / d B, symmetric
  scope.note(wb);

  // B sees the points through both kernel arguments; with a symmetric
  // weight the two contributions coincide.
  out.dpoints = kernel_grad_contract(xb, xr, g, gamma, wg) +
                2.0 * kernel_grad_contract(xr, xr, b, gamma, wb);
  scope.note(out.dpoints);
  return out;
}

}  // namespace dikf
