#include "dikf/kernels.hpp"

#include <cmath>

#include "dikf/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dikf {

void validate(const KernelConfig& cfg) {
  if (cfg.family != KernelFamily::gaussian) {
    throw ConfigError("kernel: unknown family");
  }
  if (!(cfg.gamma > 0.0) || !std::isfinite(cfg.gamma)) {
    throw ConfigError("kernel: gamma must be finite and > 0");
  }
}

namespace {

void check_pair(const Matrix& x1, const Matrix& x2, const char* op) {
  if (x1.rows() != x2.rows()) {
    throw DimensionError(std::string(op) + ": input dimension mismatch (" +
                         std::to_string(x1.rows()) + " vs " +
                         std::to_string(x2.rows()) + ")");
  }
  if (x1.cols() < 1 || x2.cols() < 1) {
    throw DimensionError(std::string(op) + ": empty sample set");
  }
}

}  // namespace

Matrix kernel_matrix(const Matrix& x1, const Matrix& x2,
                     const KernelConfig& cfg) {
  validate(cfg);
  check_pair(x1, x2, "kernel_matrix");

  // ||a-b||^2 = ||a||^2 + ||b||^2 - 2 a.b, with the cross term as one GEMM.
  const Vector sq1 = x1.colwise().squaredNorm().transpose();
  const Vector sq2 = x2.colwise().squaredNorm().transpose();
  Matrix k = -2.0 * (x1.transpose() * x2);
  const double gamma = cfg.gamma;
  const Index n1 = k.rows();
  const Index n2 = k.cols();
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n2; ++j) {
    for (Index i = 0; i < n1; ++i) {
      // Expanded form can go slightly negative for near-identical points.
      const double d2 = std::max(0.0, k(i, j) + sq1(i) + sq2(j));
      k(i, j) = std::exp(-gamma * d2);
    }
  }
  return k;
}

Matrix kernel_grad_contract(const Matrix& x1, const Matrix& x2, const Matrix& k,
                            double gamma, const Matrix& w) {
  check_pair(x1, x2, "kernel_grad_contract");
  if (k.rows() != x1.cols() || k.cols() != x2.cols()) {
    throw DimensionError("kernel_grad_contract: kernel block shape mismatch");
  }
  if (w.rows() != k.rows() || w.cols() != k.cols()) {
    throw DimensionError("kernel_grad_contract: weight shape mismatch");
  }
  // sum_ij W_ij dK_ij/dx2(:,j) with K_ij = exp(-gamma ||x1_i - x2_j||^2):
  //   dK_ij/dx2(:,j) = 2 gamma K_ij (x1_i - x2_j)
  // which contracts to 2 gamma (X1 (W.*K) - X2 diag(colsum(W.*K))).
  Matrix wk = w.cwiseProduct(k);
  Matrix out = x1 * wk;
  const Vector colsum = wk.colwise().sum().transpose();
  out.noalias() -= x2 * colsum.asDiagonal();
  out *= 2.0 * gamma;
  return out;
}

KernelGrad::KernelGrad(Matrix x1, Matrix x2, const KernelConfig& cfg)
    : x1_(std::move(x1)), x2_(std::move(x2)), gamma_(cfg.gamma) {
  k_ = kernel_matrix(x1_, x2_, cfg);
}

Vector KernelGrad::at(Index i, Index j) const {
  if (i < 0 || i >= k_.rows() || j < 0 || j >= k_.cols()) {
    throw DimensionError("KernelGrad::at: index out of range");
  }
  return 2.0 * gamma_ * k_(i, j) * (x1_.col(i) - x2_.col(j));
}

Matrix KernelGrad::contract(const Matrix& w) const {
  return kernel_grad_contract(x1_, x2_, k_, gamma_, w);
}

namespace ref {

Matrix kernel_matrix(const Matrix& x1, const Matrix& x2,
                     const KernelConfig& cfg) {
  validate(cfg);
  check_pair(x1, x2, "ref::kernel_matrix");
  Matrix k(x1.cols(), x2.cols());
  for (Index j = 0; j < x2.cols(); ++j) {
    for (Index i = 0; i < x1.cols(); ++i) {
      k(i, j) = std::exp(-cfg.gamma * (x1.col(i) - x2.col(j)).squaredNorm());
    }
  }
  return k;
}

Matrix kernel_grad_contract(const Matrix& x1, const Matrix& x2, const Matrix& k,
                            double gamma, const Matrix& w) {
  check_pair(x1, x2, "ref::kernel_grad_contract");
  Matrix out = Matrix::Zero(x2.rows(), x2.cols());
  for (Index j = 0; j < x2.cols(); ++j) {
    for (Index i = 0; i < x1.cols(); ++i) {
      out.col(j) += w(i, j) * 2.0 * gamma * k(i, j) * (x1.col(i) - x2.col(j));
    }
  }
  return out;
}

}  // namespace ref

}  // namespace dikf
