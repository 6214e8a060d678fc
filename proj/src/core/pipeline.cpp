#include "core/pipeline.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace psnspd {

void CountRecord::validate() const {
  if (threshold_counts.empty())
    fail(ErrorCode::InvalidArgument, "record needs at least one threshold count");
  if (threshold_counts.size() > kMaxPixels)
    fail(ErrorCode::InvalidArgument, "record has more thresholds than supported pixels");
  if (!std::isfinite(rep_rate_hz) || rep_rate_hz <= 0.0)
    fail(ErrorCode::InvalidArgument, "rep_rate_hz must be positive");
  if (!std::isfinite(acquisition_time_s) || acquisition_time_s <= 0.0)
    fail(ErrorCode::InvalidArgument, "acquisition_time_s must be positive");
  if (mu && (!std::isfinite(*mu) || *mu < 0.0))
    fail(ErrorCode::InvalidArgument, "mu must be >= 0");
  for (std::size_t k = 0; k + 1 < threshold_counts.size(); ++k)
    if (threshold_counts[k] < threshold_counts[k + 1])
      fail(ErrorCode::InvalidArgument,
           "threshold counts are not nested: c_" + std::to_string(k + 1) + " < c_" +
               std::to_string(k + 2));
  const std::uint64_t pulses = total_pulses(*this);
  if (pulses == 0) fail(ErrorCode::InvalidArgument, "acquisition contains no pulses");
  if (threshold_counts.front() > pulses)
    fail(ErrorCode::InvalidArgument,
         "c_1 = " + std::to_string(threshold_counts.front()) +
             " exceeds the pulse total " + std::to_string(pulses));
}

std::uint64_t total_pulses(const CountRecord& rec) {
  return static_cast<std::uint64_t>(std::llround(rec.rep_rate_hz * rec.acquisition_time_s));
}

ClickStatistics counts_to_click_statistics(const CountRecord& rec,
                                           const CountConversionOptions& options) {
  rec.validate();
  if (!std::isfinite(options.background_rate_hz) || options.background_rate_hz < 0.0)
    fail(ErrorCode::InvalidArgument, "background rate must be >= 0");

  const auto& c = rec.threshold_counts;
  const std::size_t n_pixels = c.size();
  const std::uint64_t pulses = total_pulses(rec);

  std::vector<std::uint64_t> exclusive(n_pixels + 1, 0);
  for (std::size_t n = 1; n <= n_pixels; ++n)
    exclusive[n] = c[n - 1] - (n < n_pixels ? c[n] : 0);
  exclusive[0] = pulses - c.front();

  if (options.background_rate_hz > 0.0) {
    const auto background = static_cast<std::uint64_t>(
        std::llround(options.background_rate_hz * rec.acquisition_time_s));
    const std::uint64_t removed = std::min(background, exclusive[1]);
    exclusive[1] -= removed;
    exclusive[0] += removed;
  }

  std::vector<double> q(n_pixels + 1);
  const double total = static_cast<double>(pulses);
  for (std::size_t n = 0; n <= n_pixels; ++n) q[n] = static_cast<double>(exclusive[n]) / total;
  return ClickStatistics(std::move(q));
}

std::vector<std::uint64_t> histogram_to_threshold_counts(const ClickCountsHistogram& hist) {
  if (hist.counts.size() < 2)
    fail(ErrorCode::InvalidArgument, "histogram needs at least two bins");
  std::vector<std::uint64_t> thresholds(hist.counts.size() - 1, 0);
  std::uint64_t running = 0;
  for (std::size_t n = hist.counts.size() - 1; n >= 1; --n) {
    running += hist.counts[n];
    thresholds[n - 1] = running;
  }
  return thresholds;
}

CountRecord histogram_to_record(const ClickCountsHistogram& hist, double rep_rate_hz,
                                std::optional<double> mu) {
  if (!std::isfinite(rep_rate_hz) || rep_rate_hz <= 0.0)
    fail(ErrorCode::InvalidArgument, "rep_rate_hz must be positive");
  CountRecord rec{histogram_to_threshold_counts(hist), rep_rate_hz,
                  static_cast<double>(hist.n_pulses) / rep_rate_hz, mu};
  rec.validate();
  return rec;
}

FitWorkflowResult run_fit_workflow(std::span<const CountRecord> records,
                                   const FitWorkflowConfig& config) {
  if (records.empty()) fail(ErrorCode::InvalidArgument, "no records to fit");
  const std::size_t n_pixels = records.front().n_pixels();
  std::vector<FitObservation> observations;
  observations.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.n_pixels() != n_pixels)
      fail(ErrorCode::DimensionMismatch,
           "record " + std::to_string(i) + " has " + std::to_string(rec.n_pixels()) +
               " thresholds, expected " + std::to_string(n_pixels));
    if (!rec.mu) fail(ErrorCode::InvalidArgument, "record " + std::to_string(i) + " has no mu");
    observations.push_back({counts_to_click_statistics(rec, config.counts),
                            poisson_statistics(*rec.mu, config.max_photons)});
  }
  FitResult fit = fit_efficiencies(observations, n_pixels, config.fit);
  ProbabilityMatrix matrix = build_p_matrix(fit.etas, config.max_photons);
  return {std::move(fit), std::move(matrix)};
}

ReconstructWorkflowResult run_reconstruct_workflow(const ProbabilityMatrix& p,
                                                   const ClickStatistics& q,
                                                   const std::optional<PhotonStatistics>& truth) {
  ReconstructionResult result = reconstruct_statistics(p, q);
  auto table = reconstruction_table(result, truth);
  return {std::move(result), std::move(table)};
}

}  // namespace psnspd
