#pragma once

#include "dikf/types.hpp"

namespace dikf {

enum class KernelFamily { gaussian };

/// Gaussian (RBF) kernel k(x, y) = exp(-gamma * ||x - y||^2).
/// gamma must be finite and positive.
struct KernelConfig {
  KernelFamily family = KernelFamily::gaussian;
  double gamma = 1.0;
};

void validate(const KernelConfig& cfg);

/// k(X1, X2): the N1 x N2 matrix of kernel values between the columns of
/// X1 (d x N1) and X2 (d x N2). Entries lie in (0, 1]. OpenMP-parallel;
/// ref::kernel_matrix is the serial reference.
Matrix kernel_matrix(const Matrix& x1, const Matrix& x2,
                     const KernelConfig& cfg);

/// Contraction of a weight matrix against the kernel derivative in the
/// second argument: given W (N1 x N2) and K = k(X1, X2), returns the d x N2
/// matrix whose column j is sum_i W(i,j) * dk(x1_i, x2_j)/dx2_j
///   = 2*gamma * (X1 * (W .* K) - X2 * diag(colsum(W .* K))) for Gaussian.
/// This is the only form the objective gradients need; the full
/// N1 x N2 x d tensor is never materialized.
Matrix kernel_grad_contract(const Matrix& x1, const Matrix& x2,
                            const Matrix& k, double gamma, const Matrix& w);

/// Accessor over dk(x1_i, x2_j)/dx2_j with the kernel matrix cached.
class KernelGrad {
 public:
  KernelGrad(Matrix x1, Matrix x2, const KernelConfig& cfg);

  const Matrix& kernel() const { return k_; }

  /// The d-vector dk(x1_i, x2_j)/dx2_j = 2*gamma*k(x1_i,x2_j)*(x1_i - x2_j).
  Vector at(Index i, Index j) const;

  /// sum_ij W(i,j) * dk(x1_i, x2_j)/dx2_j, as a d x N2 matrix.
  Matrix contract(const Matrix& w) const;

 private:
  Matrix x1_, x2_, k_;
  double gamma_;
};

namespace ref {
// Straightforward serial implementations kept as the testing reference for
// the parallel kernels above.
Matrix kernel_matrix(const Matrix& x1, const Matrix& x2,
                     const KernelConfig& cfg);
Matrix kernel_grad_contract(const Matrix& x1, const Matrix& x2,
                            const Matrix& k, double gamma, const Matrix& w);
}  // namespace ref

}  // namespace dikf
