#pragma once

#include "dikf/types.hpp"

namespace dikf {

/// Symmetric eigendecomposition, eigenvalues sorted non-increasing,
/// eigenvectors as orthonormal columns.
struct EigFactors {
  Vector values;
  Matrix vectors;
};

/// Default relative tolerance used to decide numerical rank:
/// 1e-12 * max(rows, cols).
double default_rank_tol(Index rows, Index cols);

/// Eigendecomposition of a symmetric matrix. Rejects non-square or
/// asymmetric input (asymmetry above 1e-10 relative to the largest entry).
EigFactors sym_eig(const Matrix& m);

/// Moore-Penrose inverse of a symmetric PSD matrix. Eigenvalues below
/// rel_tol * lambda_max are treated as zero; a negative eigenvalue beyond
/// -1e-8 * lambda_max raises PsdViolationError. rel_tol < 0 selects the
/// default tolerance.
Matrix pinv_psd(const Matrix& m, double rel_tol = -1.0);

/// Solves (M + rho*I) X = B. With rho > 0 this is an exact SPD solve;
/// with rho == 0 it falls back to the pseudoinverse path and raises
/// RankDeficiencyError if every eigenvalue is rejected.
Matrix solve_ridge(const Matrix& m, double rho, const Matrix& b);

/// M * C with C = I - (1/N) 11^T applied implicitly: every row of the
/// result has zero mean. O(rows*cols) memory, never materializes C.
Matrix center_cols(const Matrix& m);
void center_cols_in_place(Matrix& m);

/// C * M: every column of the result has zero mean. Used for Gram blocks
/// whose rows index samples.
Matrix center_rows(const Matrix& m);
void center_rows_in_place(Matrix& m);

/// Pseudoinverse solver for symmetric PSD systems, factored once and
/// applied to many right-hand sides. Eigenvalues at or below
/// rel_tol * lambda_max are dropped from the support.
class PsdPinvSolver {
 public:
  explicit PsdPinvSolver(const Matrix& m, double rel_tol = -1.0);

  Index rank() const { return rank_; }
  const EigFactors& factors() const { return eig_; }

  /// M^+ * rhs restricted to the retained support.
  Matrix solve(const Matrix& rhs) const;

 private:
  EigFactors eig_;
  Index rank_ = 0;
};

}  // namespace dikf
