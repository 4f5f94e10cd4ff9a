#include "dikf/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "dikf/errors.hpp"

namespace dikf {

namespace {

constexpr double kAsymTol = 1e-10;
constexpr double kPsdTol = 1e-8;

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite entries");
  }
}

}  // namespace

double default_rank_tol(Index rows, Index cols) {
  return 1e-12 * static_cast<double>(std::max(rows, cols));
}

EigFactors sym_eig(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw ContractError("sym_eig: matrix must be square");
  }
  check_finite(m, "sym_eig");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymTol * scale) {
    throw ContractError("sym_eig: asymmetry " + std::to_string(asym) +
                        " exceeds tolerance");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("sym_eig: eigendecomposition failed to converge");
  }
  // Eigen sorts ascending; the contract is non-increasing.
  EigFactors out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

PsdPinvSolver::PsdPinvSolver(const Matrix& m, double rel_tol) {
  if (rel_tol < 0.0) rel_tol = default_rank_tol(m.rows(), m.cols());
  eig_ = sym_eig(m);
  const double lmax = eig_.values.size() > 0 ? eig_.values(0) : 0.0;
  if (eig_.values.size() > 0 &&
      eig_.values(eig_.values.size() - 1) < -kPsdTol * std::max(1.0, lmax)) {
    throw PsdViolationError("pinv_psd: eigenvalue " +
                            std::to_string(eig_.values(eig_.values.size() - 1)) +
                            " below the PSD tolerance");
  }
  const double cutoff = rel_tol * std::max(lmax, 0.0);
  rank_ = 0;
  while (rank_ < eig_.values.size() && eig_.values(rank_) > cutoff &&
         eig_.values(rank_) > 0.0) {
    ++rank_;
  }
}

Matrix PsdPinvSolver::solve(const Matrix& rhs) const {
  if (rhs.rows() != eig_.vectors.rows()) {
    throw DimensionError("PsdPinvSolver::solve: rhs row mismatch");
  }
  if (rank_ == 0) return Matrix::Zero(rhs.rows(), rhs.cols());
  const auto u = eig_.vectors.leftCols(rank_);
  Matrix proj = u.transpose() * rhs;
  proj.array().colwise() /= eig_.values.head(rank_).array();
  return u * proj;
}

Matrix pinv_psd(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) {
    throw ContractError("pinv_psd: matrix must be square");
  }
  PsdPinvSolver solver(m, rel_tol);
  const Index r = solver.rank();
  if (r == 0) return Matrix::Zero(m.rows(), m.cols());
  const auto& f = solver.factors();
  const auto u = f.vectors.leftCols(r);
  Matrix out = u * f.values.head(r).cwiseInverse().asDiagonal() * u.transpose();
  // The product is symmetric up to round-off; return it exactly symmetric.
  out = ((out + out.transpose()) * 0.5).eval();
  return out;
}

Matrix solve_ridge(const Matrix& m, double rho, const Matrix& b) {
  if (m.rows() != m.cols()) {
    throw ContractError("solve_ridge: matrix must be square");
  }
  if (m.rows() != b.rows()) {
    throw DimensionError("solve_ridge: rhs row mismatch");
  }
  if (rho < 0.0 || !std::isfinite(rho)) {
    throw ContractError("solve_ridge: rho must be finite and >= 0");
  }
  if (rho > 0.0) {
    Matrix shifted = m;
    shifted.diagonal().array() += rho;
    Eigen::LDLT<Matrix> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalError("solve_ridge: LDLT factorization failed");
    }
    return ldlt.solve(b);
  }
  PsdPinvSolver solver(m);
  if (solver.rank() == 0 && m.cwiseAbs().maxCoeff() > 0.0) {
    throw RankDeficiencyError(
        "solve_ridge: rho = 0 and every eigenvalue rejected");
  }
  if (solver.rank() == 0) {
    throw RankDeficiencyError("solve_ridge: rho = 0 on a zero matrix");
  }
  return solver.solve(b);
}

Matrix center_cols(const Matrix& m) {
  Matrix out = m;
  center_cols_in_place(out);
  return out;
}

void center_cols_in_place(Matrix& m) {
  if (m.cols() < 1) {
    throw ContractError("center_cols: need at least one column");
  }
  m.colwise() -= m.rowwise().mean().eval();
}

Matrix center_rows(const Matrix& m) {
  Matrix out = m;
  center_rows_in_place(out);
  return out;
}

void center_rows_in_place(Matrix& m) {
  if (m.rows() < 1) {
    throw ContractError("center_rows: need at least one row");
  }
  m.rowwise() -= m.colwise().mean().eval();
}

}  // namespace dikf
