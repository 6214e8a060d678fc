#include "core/detector_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "core/error.hpp"

namespace psnspd {
namespace {

constexpr double kSumSlack = 1e-12;

}  // namespace

//---------------------------------------------------------------------------//
// PixelEfficiencies
//---------------------------------------------------------------------------//

PixelEfficiencies::PixelEfficiencies(std::vector<double> etas) : etas_(std::move(etas)) {
  if (etas_.empty()) fail(ErrorCode::InvalidArgument, "at least one pixel is required");
  if (etas_.size() > kMaxPixels)
    fail(ErrorCode::InvalidArgument,
         "too many pixels: " + std::to_string(etas_.size()) + " > " +
             std::to_string(kMaxPixels));
  for (std::size_t i = 0; i < etas_.size(); ++i) {
    const double e = etas_[i];
    if (!std::isfinite(e) || e < 0.0 || e > 1.0)
      fail(ErrorCode::InvalidArgument,
           "pixel efficiency " + std::to_string(i) + " outside [0, 1]");
  }
  if (total() > 1.0 + kSumSlack)
    fail(ErrorCode::InvalidArgument, "pixel efficiencies sum to more than 1");
}

double PixelEfficiencies::total() const noexcept {
  return std::accumulate(etas_.begin(), etas_.end(), 0.0);
}

double PixelEfficiencies::miss_probability(std::uint32_t fired_mask) const noexcept {
  double active = 0.0;
  for (std::size_t j = 0; j < etas_.size(); ++j)
    if (!(fired_mask >> j & 1u)) active += etas_[j];
  return std::max(0.0, 1.0 - active);
}

PixelEfficiencies PixelEfficiencies::sorted() const {
  auto copy = etas_;
  std::sort(copy.begin(), copy.end());
  return PixelEfficiencies(std::move(copy));
}

//---------------------------------------------------------------------------//
// ProbabilityMatrix
//---------------------------------------------------------------------------//

ProbabilityMatrix::ProbabilityMatrix(std::size_t n_pixels, std::size_t max_photons,
                                     std::vector<double> row_major,
                                     double column_sum_tolerance)
    : n_pixels_(n_pixels), max_photons_(max_photons), entries_(std::move(row_major)) {
  if (n_pixels_ == 0) fail(ErrorCode::InvalidArgument, "matrix needs at least one pixel");
  if (entries_.size() != rows() * cols())
    fail(ErrorCode::DimensionMismatch,
         "matrix entry count " + std::to_string(entries_.size()) + " does not match " +
             std::to_string(rows()) + "x" + std::to_string(cols()));
  for (std::size_t n = 0; n < rows(); ++n) {
    for (std::size_t m = 0; m < cols(); ++m) {
      const double p = (*this)(n, m);
      if (!std::isfinite(p) || p < -kSumSlack || p > 1.0 + kSumSlack)
        fail(ErrorCode::InvalidArgument, "matrix entry outside [0, 1]");
      if (n > m && std::abs(p) > kSumSlack)
        fail(ErrorCode::InvalidArgument, "matrix entry below the diagonal is nonzero");
    }
  }
  for (std::size_t m = 0; m < cols(); ++m) {
    double sum = 0.0;
    for (std::size_t n = 0; n < rows(); ++n) sum += (*this)(n, m);
    if (std::abs(sum - 1.0) > column_sum_tolerance)
      fail(ErrorCode::InvalidArgument,
           "matrix column " + std::to_string(m) + " does not sum to 1");
  }
}

//---------------------------------------------------------------------------//
// ActiveSubsetDistribution
//---------------------------------------------------------------------------//

ActiveSubsetDistribution::ActiveSubsetDistribution(std::size_t n_pixels)
    : n_pixels_(n_pixels) {
  if (n_pixels == 0 || n_pixels > kMaxPixels)
    fail(ErrorCode::InvalidArgument, "unsupported pixel count");
  probs_.assign(std::size_t{1} << n_pixels, 0.0);
  probs_[0] = 1.0;
}

ActiveSubsetDistribution::ActiveSubsetDistribution(std::size_t n_pixels,
                                                   std::vector<double> probabilities)
    : n_pixels_(n_pixels), probs_(std::move(probabilities)) {
  if (n_pixels == 0 || n_pixels > kMaxPixels)
    fail(ErrorCode::InvalidArgument, "unsupported pixel count");
  if (probs_.size() != (std::size_t{1} << n_pixels))
    fail(ErrorCode::DimensionMismatch, "subset distribution size must be 2^N");
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0)
      fail(ErrorCode::InvalidArgument, "subset probability must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    fail(ErrorCode::InvalidArgument, "subset probabilities must sum to 1");
}

double ActiveSubsetDistribution::fired_count_probability(std::size_t n) const {
  double total = 0.0;
  for (std::size_t mask = 0; mask < probs_.size(); ++mask)
    if (static_cast<std::size_t>(std::popcount(mask)) == n) total += probs_[mask];
  return total;
}

//---------------------------------------------------------------------------//
// Recursion
//---------------------------------------------------------------------------//

ActiveSubsetDistribution evolve_one_photon(const ActiveSubsetDistribution& state,
                                           const PixelEfficiencies& etas) {
  const std::size_t n_pixels = etas.size();
  if (state.n_pixels() != n_pixels)
    fail(ErrorCode::DimensionMismatch,
         "state tracks " + std::to_string(state.n_pixels()) + " pixels but " +
             std::to_string(n_pixels) + " efficiencies were given");

  const auto in = state.probabilities();
  std::vector<double> out(in.size(), 0.0);
  for (std::uint32_t fired = 0; fired < in.size(); ++fired) {
    const double p = in[fired];
    if (p == 0.0) continue;
    out[fired] += p * etas.miss_probability(fired);
    for (std::size_t j = 0; j < n_pixels; ++j) {
      const std::uint32_t bit = 1u << j;
      if (!(fired & bit)) out[fired | bit] += p * etas[j];
    }
  }
  return ActiveSubsetDistribution(n_pixels, std::move(out));
}

ProbabilityMatrix build_p_matrix(const PixelEfficiencies& etas, std::size_t max_photons) {
  const std::size_t rows = etas.size() + 1;
  const std::size_t cols = max_photons + 1;
  std::vector<double> entries(rows * cols, 0.0);

  ActiveSubsetDistribution state(etas.size());
  for (std::size_t m = 0; m < cols; ++m) {
    if (m > 0) state = evolve_one_photon(state, etas);
    const auto probs = state.probabilities();
    for (std::size_t mask = 0; mask < probs.size(); ++mask)
      entries[static_cast<std::size_t>(std::popcount(mask)) * cols + m] += probs[mask];
  }
  return ProbabilityMatrix(etas.size(), max_photons, std::move(entries), 1e-12);
}

//---------------------------------------------------------------------------//
// Closed-form enumeration
//---------------------------------------------------------------------------//

namespace {

// Sums over the next detection position `gamma` (1-based, after `last`) and the
// next pixel to fire, given the ordered pixels already fired.
double enumerate_detections(const PixelEfficiencies& etas, std::size_t clicks_left,
                            std::size_t last, std::size_t m, std::uint32_t fired) {
  double active_sum = 0.0;
  for (std::size_t k = 0; k < etas.size(); ++k)
    if (!(fired >> k & 1u)) active_sum += etas[k];
  const double miss = std::max(0.0, 1.0 - active_sum);
  if (clicks_left == 0) return std::pow(miss, static_cast<double>(m - last));

  double total = 0.0;
  for (std::size_t gamma = last + 1; gamma + clicks_left - 1 <= m; ++gamma) {
    const double missed_before = std::pow(miss, static_cast<double>(gamma - last - 1));
    for (std::size_t j = 0; j < etas.size(); ++j) {
      const std::uint32_t bit = 1u << j;
      if (fired & bit) continue;
      total += missed_before * etas[j] *
               enumerate_detections(etas, clicks_left - 1, gamma, m, fired | bit);
    }
  }
  return total;
}

}  // namespace

double enumerate_pnm_closed_form(const PixelEfficiencies& etas, std::size_t n,
                                 std::size_t m) {
  if (n > etas.size())
    fail(ErrorCode::InvalidArgument,
         "click count " + std::to_string(n) + " exceeds pixel count " +
             std::to_string(etas.size()));
  if (n > m) return 0.0;
  if (n == 0) return std::pow(std::max(0.0, 1.0 - etas.total()), static_cast<double>(m));
  return enumerate_detections(etas, n, 0, m, 0u);
}

}  // namespace psnspd
