#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dikf/data_io.hpp"
#include "dikf/memory.hpp"
#include "dikf/objectives.hpp"
#include "dikf/types.hpp"

namespace dikf {

struct TrainConfig {
  Index batch_size = 1000;
  double lr0 = 1e-3;
  double lr_decay = 0.1;  // in (0, 1)
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double saturation_rel_tol = 1e-3;
  Index max_epochs = 100;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);

/// Per-parameter-tensor Adam accumulators.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long t = 0;

  static AdamState like(const std::vector<Matrix>& params);
};

/// One Adam update in the ascent direction: params <- params + step(grads).
/// Deterministic; shapes of grads must match params.
void adam_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads,
               AdamState& state, const TrainConfig& cfg, double lr);

/// Running mean of the first b batch objectives:
/// mu' = ((b-1)/b) mu + (1/b) value.
double epoch_mean_update(double mu_prev, Index b, double value);

/// Batch size actually used for feature dimensionality J: the configured
/// size, bumped to max(batch_size, 2J) when J > 500. The result must
/// exceed J and, when n_samples is given, not exceed it.
Index effective_batch_size(Index j, const TrainConfig& cfg,
                           std::optional<Index> n_samples = std::nullopt);

enum class StopReason { max_epochs, converged };
std::string to_string(StopReason r);

struct EpochRecord {
  Index epoch = 0;
  double mu = 0.0;
  double lr = 0.0;
};

struct LrChange {
  Index epoch = 0;
  double lr = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::vector<LrChange> lr_changes;
  StopReason stop_reason = StopReason::max_epochs;
  double wall_seconds = 0.0;
  std::size_t peak_step_floats = 0;  // largest per-step temporary footprint
};

/// Mini-batch gradient ascent of the Gram-level discriminant objective over
/// the representative points, with Adam and the decay-on-saturation
/// learning-rate schedule.
std::pair<NystromMap, TrainReport> train_nystrom(const Dataset& data,
                                                 const NystromMap& map,
                                                 const TrainConfig& cfg,
                                                 const DIConfig& dicfg);

/// Same schedule over the Fourier map parameters (W and phases jointly).
std::pair<FourierMap, TrainReport> train_fourier(const Dataset& data,
                                                 const FourierMap& map,
                                                 const TrainConfig& cfg,
                                                 const DIConfig& dicfg);

namespace detail {

/// One optimization step over a mini-batch. Returns the objective value
/// after the parameter update (this is what the epoch mean tracks).
using StepFn = std::function<double(const std::vector<Index>& batch, double lr,
                                    MemLedger* ledger)>;

/// The shared schedule: per epoch, shuffle into floor(N/batch) full batches,
/// run the step on each, track the running epoch mean; decay the learning
/// rate when the mean fails to improve on its best value by
/// saturation_rel_tol (relative), and stop at the second saturation or at
/// max_epochs. Throws NumericalError on a non-finite objective.
TrainReport run_schedule(Index n_samples, Index batch_size,
                         const TrainConfig& cfg, const StepFn& step);

}  // namespace detail

}  // namespace dikf
