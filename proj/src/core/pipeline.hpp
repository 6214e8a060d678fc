#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "core/efficiency_fit.hpp"
#include "core/mc_simulator.hpp"
#include "core/reconstruction.hpp"

namespace psnspd {

/// Raw time-tagger counts for one acquisition. threshold_counts[k] counts the
/// events crossing the (k+1)-th amplitude threshold, so the counts are nested
/// (non-increasing).
struct CountRecord {
  std::vector<std::uint64_t> threshold_counts;
  double rep_rate_hz = 0.0;
  double acquisition_time_s = 0.0;
  std::optional<double> mu;

  std::size_t n_pixels() const noexcept { return threshold_counts.size(); }
  void validate() const;
};

//! Pulses in the acquisition, round(R * t).
std::uint64_t total_pulses(const CountRecord& rec);

struct CountConversionOptions {
  //! Dark-count rate to subtract, in counts per second. Off by default.
  double background_rate_hz = 0.0;
};

/// Exclusive click counts c'_n = c_n - c_{n+1}, zero-click count
/// N_tot - c_1, divided by N_tot. A nonzero background rate removes
/// round(rate * t) events from the 1-click class and returns them to the
/// zero-click class.
ClickStatistics counts_to_click_statistics(const CountRecord& rec,
                                           const CountConversionOptions& options = {});

//! Nested threshold encoding of a histogram: c_n = sum_{k >= n} counts[k].
std::vector<std::uint64_t> histogram_to_threshold_counts(const ClickCountsHistogram& hist);

//! Record as a time tagger would produce it for the simulated pulses.
CountRecord histogram_to_record(const ClickCountsHistogram& hist, double rep_rate_hz,
                                std::optional<double> mu);

struct FitWorkflowConfig {
  std::size_t max_photons = 9;
  FitOptions fit{};
  CountConversionOptions counts{};
};

struct FitWorkflowResult {
  FitResult fit;
  ProbabilityMatrix matrix;
};

//! Joint fit over all records; each record must carry mu.
FitWorkflowResult run_fit_workflow(std::span<const CountRecord> records,
                                   const FitWorkflowConfig& config = {});

struct ReconstructWorkflowResult {
  ReconstructionResult result;
  std::vector<ReconstructionRow> table;
};

ReconstructWorkflowResult run_reconstruct_workflow(
    const ProbabilityMatrix& p, const ClickStatistics& q,
    const std::optional<PhotonStatistics>& truth = std::nullopt);

}  // namespace psnspd
