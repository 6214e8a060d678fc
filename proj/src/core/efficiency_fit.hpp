//---------------------------------------------------------------------------//
//! \file core/efficiency_fit.hpp
//! Least-squares recovery of pixel efficiencies from click statistics.
//---------------------------------------------------------------------------//
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "core/detector_model.hpp"
#include "core/photon_sources.hpp"

namespace psnspd {

//! One measured (Q, S) pair. Several pairs are fitted jointly.
struct FitObservation {
  ClickStatistics q;
  PhotonStatistics s;
};

struct FitOptions {
  std::size_t n_restarts = 16;  // stratified random starts, plus one uniform start
  std::uint64_t seed = 0;
  std::size_t max_evaluations = 100000;  // per restart
  double ftol = 1e-12;
  double xtol = 1e-9;
  unsigned threads = 1;
};

struct FitResult {
  PixelEfficiencies etas;  // sorted ascending; pixel labels are not identifiable
  double residual_norm = 0.0;
  std::size_t n_restarts_used = 0;
  bool converged = false;
  //! Residual norm at each start point, in start order (uniform start first).
  std::vector<double> start_residuals;
};

//! sqrt of the summed squared residuals ||Q - P(etas) S||^2 over observations.
double fit_residual_norm(std::span<const FitObservation> observations,
                         const PixelEfficiencies& etas);

/// Minimizes the residual norm over {eta_i >= 0, sum eta_i <= 1}.
///
/// Search runs in unconstrained variables y with
/// eta_i = y_i^2 / (1 + sum_j y_j^2), which covers the feasible set, reaches
/// eta_i = 0 exactly and keeps the sum strictly below 1. The best of all
/// restarts wins; exact ties go to the lexicographically smallest sorted
/// efficiencies.
FitResult fit_efficiencies(std::span<const FitObservation> observations,
                           std::size_t n_pixels, const FitOptions& options = {});

FitResult fit_efficiencies(const ClickStatistics& q, const PhotonStatistics& s,
                           std::size_t n_pixels, const FitOptions& options = {});

}  // namespace psnspd
