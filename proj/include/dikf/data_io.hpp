#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dikf/objectives.hpp"
#include "dikf/types.hpp"

namespace dikf {

/// Per-feature affine scaling fitted on training data.
struct ScaleParams {
  Vector min;
  Vector max;
};

/// A dense supervised dataset. Samples are columns of x. Classification
/// datasets carry 0-based contiguous labels plus the original label names
/// in first-appearance order; regression datasets carry y_raw instead.
struct Dataset {
  Matrix x;  // d x N
  std::vector<int> labels;
  std::vector<std::string> label_names;  // original label per class id
  Index class_count = 0;                 // 0 => regression
  Matrix y_raw;                          // N x L, regression targets
  TargetEncoding encoding = TargetEncoding::one_hot;
  std::optional<ScaleParams> scale;  // set once min-max scaling was applied

  Index dim() const { return x.rows(); }
  Index n_samples() const { return x.cols(); }
  bool classification() const { return class_count > 0; }
  Index target_dim() const {
    return classification() ? class_count : y_raw.cols();
  }
};

/// LIBSVM sparse text format, 1-based feature indices; unlisted indices
/// are zero. Labels become 0-based contiguous ids in first-appearance
/// order. force_dim, when given, fixes the feature count (indices beyond
/// it are an error); otherwise the largest index seen decides.
Dataset load_libsvm(const std::string& path,
                    std::optional<Index> force_dim = std::nullopt);

/// Writes a dataset in the same format with full double precision, so a
/// load of the written file reproduces x and labels exactly.
void save_libsvm(const Dataset& data, const std::string& path);

/// CSV with one numeric feature row per line; label_column (0-based)
/// holds the class label, every other column is a feature.
Dataset load_csv(const std::string& path, Index label_column, bool header);

/// Fits the per-feature [0,1] map on train only. Constant features map
/// to 0.
ScaleParams fit_minmax(const Dataset& train);

/// Applies fitted parameters; values outside the training range are not
/// clipped.
void apply_minmax(Dataset& data, const ScaleParams& params);

/// Fits on train and applies to train plus any number of companion splits.
void minmax_scale(Dataset& train, std::vector<Dataset*> others = {});

/// Indicator matrix for labels in [0, L). unit_norm divides each column by
/// sqrt(count of that class within this matrix); absent classes stay zero.
Targets one_hot(const std::vector<int>& labels, Index class_count,
                TargetEncoding mode);

/// Target matrix for a subset of samples, encoded per the dataset's mode.
Targets targets_for(const Dataset& data, const std::vector<Index>& idx);

/// Columns of data.x selected by idx.
Matrix gather_cols(const Matrix& x, const std::vector<Index>& idx);

/// Mini-batch plan for one epoch: a fresh uniform permutation per
/// (seed, epoch), cut into exactly floor(N/batch_size) disjoint full
/// batches; leftover samples sit out the epoch.
std::vector<std::vector<Index>> epoch_batches(Index n_samples,
                                              Index batch_size,
                                              std::uint64_t seed, Index epoch);

/// Synthetic Gaussian class blobs, for desk-scale experiments.
struct BlobsConfig {
  Index dim = 2;
  Index classes = 2;
  Index n_samples = 200;
  double separation = 3.0;  // scale of the class-mean spread
  std::uint64_t seed = 0;
};

Dataset make_blobs(const BlobsConfig& cfg);

}  // namespace dikf
