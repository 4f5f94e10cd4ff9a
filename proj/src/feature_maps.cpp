#include "dikf/feature_maps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "dikf/data_io.hpp"
#include "dikf/errors.hpp"

namespace dikf {

NystromMap::NystromMap(Matrix points, KernelConfig kernel, double rank_tol)
    : points_(std::move(points)), kernel_(kernel), rank_tol_(rank_tol) {
  validate(kernel_);
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw DimensionError("NystromMap: need at least one representative point");
  }
  if (!points_.allFinite()) {
    throw ContractError("NystromMap: non-finite representative points");
  }
  base_ = sym_eig(kernel_matrix(points_, points_, kernel_));
  const double tol = rank_tol_ < 0.0
                         ? default_rank_tol(points_.cols(), points_.cols())
                         : rank_tol_;
  const double lmax = base_.values(0);
  const double cutoff = tol * std::max(lmax, 0.0);
  retained_ = 0;
  while (retained_ < base_.values.size() && base_.values(retained_) > cutoff &&
         base_.values(retained_) > 0.0) {
    ++retained_;
  }
}

NystromMap NystromMap::with_points(Matrix points) const {
  return NystromMap(std::move(points), kernel_, rank_tol_);
}

Matrix nystrom_features(const Matrix& x, const NystromMap& map) {
  if (x.rows() != map.input_dim()) {
    throw DimensionError("nystrom_features: input dimension mismatch");
  }
  const Index r = map.feature_dim();
  if (r == 0) {
    throw DegenerateMapError(
        "nystrom_features: base kernel matrix has numerical rank zero");
  }
  const Matrix k = kernel_matrix(map.points(), x, map.kernel());  // n x N
  Matrix phi = map.base_factors().vectors.leftCols(r).transpose() * k;
  phi.array().colwise() /=
      map.base_factors().values.head(r).array().sqrt();
  return phi;
}

Matrix rf_features(const Matrix& x, const FourierMap& map) {
  if (x.rows() != map.input_dim()) {
    throw DimensionError("rf_features: input dimension mismatch");
  }
  const Index j = map.feature_dim();
  Matrix phi = map.w.transpose() * x;  // J x N
  const double scale = std::sqrt(2.0 / static_cast<double>(j));
  const Index n = phi.cols();
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < j; ++r) {
      phi(r, c) = scale * std::cos(phi(r, c) + map.phase(r));
    }
  }
  return phi;
}

NystromMap init_nystrom(const Dataset& data, Index n, const KernelConfig& cfg,
                        std::uint64_t seed, double rank_tol) {
  if (n < 1 || n > data.n_samples()) {
    throw ConfigError("init_nystrom: representative count must be in [1, N]");
  }
  std::vector<Index> order(static_cast<std::size_t>(data.n_samples()));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Matrix points(data.dim(), n);
  for (Index i = 0; i < n; ++i) {
    points.col(i) = data.x.col(order[static_cast<std::size_t>(i)]);
  }
  return NystromMap(std::move(points), cfg, rank_tol);
}

FourierMap init_fourier(const KernelConfig& cfg, Index dim, Index j,
                        std::uint64_t seed) {
  validate(cfg);
  if (dim < 1 || j < 1) {
    throw ConfigError("init_fourier: dim and J must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 * cfg.gamma));
  std::uniform_real_distribution<double> uniform(
      0.0, 2.0 * 3.14159265358979323846);
  FourierMap map;
  map.gamma = cfg.gamma;
  map.w.resize(dim, j);
  for (Index c = 0; c < j; ++c) {
    for (Index r = 0; r < dim; ++r) {
      map.w(r, c) = normal(rng);
    }
  }
  map.phase.resize(j);
  for (Index r = 0; r < j; ++r) {
    map.phase(r) = uniform(rng);
  }
  return map;
}

namespace ref {

Matrix rf_features(const Matrix& x, const FourierMap& map) {
  if (x.rows() != map.input_dim()) {
    throw DimensionError("ref::rf_features: input dimension mismatch");
  }
  const Index j = map.feature_dim();
  const double scale = std::sqrt(2.0 / static_cast<double>(j));
  Matrix phi(j, x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    for (Index r = 0; r < j; ++r) {
      double z = map.phase(r);
      for (Index k = 0; k < x.rows(); ++k) {
        z += map.w(k, r) * x(k, c);
      }
      phi(r, c) = scale * std::cos(z);
    }
  }
  return phi;
}

}  // namespace ref

}  // namespace dikf
