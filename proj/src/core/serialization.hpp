#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "core/detector_model.hpp"
#include "core/efficiency_fit.hpp"
#include "core/mc_simulator.hpp"
#include "core/pipeline.hpp"
#include "core/reconstruction.hpp"
#include "core/uncertainty.hpp"

namespace psnspd::io {

using json = nlohmann::json;

//! Parses text, mapping syntax errors to ErrorCode::Parse.
json parse(const std::string& text);

json to_json(const PixelEfficiencies& etas);
json to_json(const ProbabilityMatrix& p);
json to_json(const PhotonStatistics& s);
json to_json(const ClickStatistics& q);
json to_json(const ClickCountsHistogram& hist);
json to_json(const CountRecord& rec);
json to_json(const FitResult& fit);
json to_json(const ReconstructionResult& r);
json to_json(const std::vector<ReconstructionRow>& table);
json to_json(const MatrixUncertainty& u);
json to_json(const FluxErrorBudget& budget);

PixelEfficiencies efficiencies_from_json(const json& j);
//! Loaded matrices may carry rounded reference values, so column sums are
//! checked to 1e-2 rather than machine precision.
ProbabilityMatrix matrix_from_json(const json& j);
PhotonStatistics photon_statistics_from_json(const json& j);
ClickStatistics click_statistics_from_json(const json& j);
CountRecord record_from_json(const json& j);
//! Accepts one record object or an array of them.
std::vector<CountRecord> records_from_json(const json& j);
FluxErrorBudget budget_from_json(const json& j);

/// Simulation config: {"etas": [...], "mu": x} or {"etas": [...],
/// "source": {"probs": [...]}}, plus optional "n_pulses" and "seed".
SimulationConfig simulation_config_from_json(const json& j);

}  // namespace psnspd::io
