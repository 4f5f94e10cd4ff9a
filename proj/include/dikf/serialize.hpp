#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "dikf/feature_maps.hpp"
#include "dikf/predictors.hpp"
#include "dikf/training.hpp"
#include "dikf/types.hpp"

namespace dikf {

// Map and model artifacts share one container: the magic line "DIKF1",
// a one-line JSON header (kind, shapes, kernel parameter, tolerances),
// then the payload as raw little-endian float64, row-major per block.

void save_map(const NystromMap& map, const std::string& path);
void save_map(const FourierMap& map, const std::string& path);

using AnyMap = std::variant<NystromMap, FourierMap>;
AnyMap load_map(const std::string& path);

void save_krr(const KRRModel& model, const std::string& path);
KRRModel load_krr(const std::string& path);

/// One record per epoch: "epoch,mu,lr".
void write_report_csv(const TrainReport& report, std::ostream& out);
void write_report_csv(const TrainReport& report, const std::string& path);

}  // namespace dikf
