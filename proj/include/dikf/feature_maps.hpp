#pragma once

#include <cstdint>

#include "dikf/kernels.hpp"
#include "dikf/numerics.hpp"
#include "dikf/types.hpp"

namespace dikf {

struct Dataset;

/// Data-dependent kernel feature map parametrized by representative points.
/// The eigendecomposition of B = k(Xr, Xr) is computed at construction and
/// reused by feature evaluation; a map is an immutable value, updates go
/// through with_points().
class NystromMap {
 public:
  NystromMap(Matrix points, KernelConfig kernel, double rank_tol = -1.0);

  const Matrix& points() const { return points_; }
  const KernelConfig& kernel() const { return kernel_; }
  double rank_tol() const { return rank_tol_; }
  const EigFactors& base_factors() const { return base_; }

  Index input_dim() const { return points_.rows(); }
  /// Number of representative points n (the trainable parameter count / d).
  Index size() const { return points_.cols(); }
  /// Numerical rank of B under rank_tol: the emitted feature dimension.
  Index feature_dim() const { return retained_; }

  /// Same kernel and tolerance, new representative points.
  NystromMap with_points(Matrix points) const;

 private:
  Matrix points_;  // d x n
  KernelConfig kernel_;
  double rank_tol_;
  EigFactors base_;  // eig of k(points, points)
  Index retained_ = 0;
};

/// Random Fourier cosine feature map phi(x) = sqrt(2/J) cos(W^T x + b).
struct FourierMap {
  Matrix w;      // d x J
  Vector phase;  // J, entries in [0, 2*pi]
  double gamma;  // kernel parameter the map was drawn for (metadata)

  Index input_dim() const { return w.rows(); }
  Index feature_dim() const { return w.cols(); }
};

/// phi(X; Xr) = Sigma^{-1/2} U^T k(X, Xr)^T, rows = features (J' x N).
/// Raises DegenerateMapError if the whitening retained no direction.
Matrix nystrom_features(const Matrix& x, const NystromMap& map);

/// sqrt(2/J) cos(W^T X + b 1^T), J x N. OpenMP-parallel;
/// ref::rf_features is the serial reference.
Matrix rf_features(const Matrix& x, const FourierMap& map);

/// Uniform sample (without replacement) of n training columns.
NystromMap init_nystrom(const Dataset& data, Index n, const KernelConfig& cfg,
                        std::uint64_t seed, double rank_tol = -1.0);

/// W entries i.i.d. Normal(0, 2*gamma), phases i.i.d. Uniform[0, 2*pi].
FourierMap init_fourier(const KernelConfig& cfg, Index dim, Index j,
                        std::uint64_t seed);

namespace ref {
Matrix rf_features(const Matrix& x, const FourierMap& map);
}

}  // namespace dikf
