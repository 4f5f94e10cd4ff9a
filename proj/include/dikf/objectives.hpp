#pragma once

#include "dikf/feature_maps.hpp"
#include "dikf/memory.hpp"
#include "dikf/types.hpp"

namespace dikf {

struct DIConfig {
  double rho = 1e-4;  // ridge regularizer, >= 0
};

void validate(const DIConfig& cfg);

enum class TargetEncoding { raw, one_hot, one_hot_unit_norm };

/// Target matrix with samples as rows (N x L) plus how it was encoded.
struct Targets {
  Matrix y;
  TargetEncoding encoding = TargetEncoding::raw;
};

/// ||C*Y||_F^2, the attainable upper bound of the discriminant objectives.
double centered_target_norm2(const Matrix& y);

/// Discriminant information of explicit features Phi (J x N):
/// tr((Pb Pb^T + rho I)^{-1} Pb Y Y^T Pb^T) with Pb = Phi*C.
/// Always in [0, ||C*Y||_F^2]. rho == 0 routes through the pseudoinverse.
double di(const Matrix& phi, const Targets& targets, const DIConfig& cfg);

/// Minimum regularized least-squares error of ridge regression on Phi:
/// ||C*Y||_F^2 - di(...). Shares the di code path exactly.
double mrlse(const Matrix& phi, const Targets& targets, const DIConfig& cfg);

/// di() composed with the Fourier feature map.
double rf_di(const Matrix& xb, const Targets& targets, const FourierMap& map,
             const DIConfig& cfg);

/// Discriminant information restricted to the span of representative
/// points, at the Gram level: tr((Gb^T Gb + rho B)^+ Gb^T Y Y^T Gb) with
/// Gb = C*G. Valid for any kernel's Gram blocks.
double kdi_from_gram(const Matrix& g, const Matrix& b, const Matrix& y,
                     double rho, double rank_tol = -1.0);

/// kdi_from_gram with G = k(Xb, Xr), B = k(Xr, Xr) from the map's kernel.
double nys_di(const Matrix& xb, const Targets& targets, const NystromMap& map,
              const DIConfig& cfg);

/// Optimal objective value of kernel discriminant component analysis on a
/// precomputed kernel matrix: tr((Kb^2 + rho Kb)^+ Kb Y Y^T Kb), Kb = CKC.
/// Cross-validation oracle for nys_di at Xr = X.
double kdca_oracle(const Matrix& k, const Targets& targets,
                   const DIConfig& cfg);

struct RfDiGrad {
  double value = 0.0;
  Matrix dw;      // d x J
  Vector dphase;  // J
};

/// Analytic gradient of rf_di in the map parameters (ascent direction).
RfDiGrad grad_rf_di(const Matrix& xb, const Targets& targets,
                    const FourierMap& map, const DIConfig& cfg,
                    MemLedger* ledger = nullptr);

struct NysDiGrad {
  double value = 0.0;
  Matrix dpoints;  // d x n
};

/// Analytic gradient of nys_di in the representative points, through both
/// Gram blocks. Raises RankDeficiencyError when the inner matrix has
/// numerical rank zero.
NysDiGrad grad_nys_di(const Matrix& xb, const Targets& targets,
                      const NystromMap& map, const DIConfig& cfg,
                      MemLedger* ledger = nullptr);

}  // namespace dikf
