//---------------------------------------------------------------------------//
//! \file core/uncertainty.hpp
//! Monte Carlo propagation of count and flux uncertainty into P.
//---------------------------------------------------------------------------//
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "core/detector_model.hpp"
#include "core/efficiency_fit.hpp"
#include "core/photon_sources.hpp"
#include "core/random.hpp"

namespace psnspd {

//---------------------------------------------------------------------------//
/*!
 * Relative uncertainties entering the photon flux calibration.
 *
 * Power meter reading, coupler split ratio, and the repeatability of each of
 * the three attenuators in the chain.
 */
struct FluxErrorBudget {
  double sigma_pm_rel = 0.0252;
  double sigma_op_rel = 0.0019;
  double sigma_at_rel = 0.0012;

  void validate() const;
};

//! sqrt(pm^2 + op^2 + 3 at^2)
double flux_relative_uncertainty(const FluxErrorBudget& budget);

/// Binomial resampling of each n >= 1 class with n_trials trials; the zero
/// class takes the remainder. Draws whose nonzero classes overflow n_trials
/// are redrawn.
ClickStatistics resample_click_counts(const ClickStatistics& q, std::uint64_t n_trials,
                                      SplitMix64& rng);
ClickStatistics resample_click_counts(const ClickStatistics& q, std::uint64_t n_trials,
                                      std::uint64_t seed);

//! Gaussian around mu with standard deviation rel_sigma * mu; negative draws
//! are redrawn.
double resample_mu(double mu, double rel_sigma, SplitMix64& rng);
double resample_mu(double mu, double rel_sigma, std::uint64_t seed);

struct UncertaintyOptions {
  std::size_t n_mc_sets = 200;
  std::uint64_t n_trials_per_set = 10'000'000;
  std::size_t max_photons = 9;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // across Monte Carlo sets
  FitOptions fit{};      // fit.seed is overridden per set
  //! Fraction of non-converged fits tolerated before failing.
  double max_discard_fraction = 0.10;
};

struct MatrixUncertainty {
  ProbabilityMatrix mean_matrix;
  std::vector<double> sigma_matrix;  // row-major, same shape as mean_matrix
  std::vector<double> etas_mean;     // sorted basis
  std::vector<double> etas_sigma;
  std::size_t n_trials = 0;  // accepted sets
  std::size_t n_discarded = 0;

  double sigma(std::size_t n, std::size_t m) const {
    return sigma_matrix[n * mean_matrix.cols() + m];
  }
};

/// Repeats fit + matrix build on resampled (Q', S') pairs and reports the
/// elementwise mean and sample standard deviation. Set i uses its own stream
/// keyed by (seed, i), so output does not depend on the thread count.
MatrixUncertainty matrix_uncertainty(const ClickStatistics& q_observed, double mu,
                                     std::size_t n_pixels, const FluxErrorBudget& budget,
                                     const UncertaintyOptions& options = {});

}  // namespace psnspd
