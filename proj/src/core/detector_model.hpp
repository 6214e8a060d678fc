//---------------------------------------------------------------------------//
//! \file core/detector_model.hpp
//! Click-probability matrix of a parallel multi-pixel detector.
//---------------------------------------------------------------------------//
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace psnspd {

//! Largest pixel count accepted; the subset recursion holds 2^N states.
inline constexpr std::size_t kMaxPixels = 20;

//---------------------------------------------------------------------------//
/*!
 * Per-pixel detection probabilities.
 *
 * Each photon reaching the device is either absorbed by pixel i (probability
 * eta_i) or missed, so every eta_i lies in [0, 1] and their sum is at most 1.
 */
class PixelEfficiencies {
 public:
  explicit PixelEfficiencies(std::vector<double> etas);

  std::size_t size() const noexcept { return etas_.size(); }
  double operator[](std::size_t i) const { return etas_[i]; }
  std::span<const double> values() const noexcept { return etas_; }

  //! System detection efficiency, sum of all eta_i.
  double total() const noexcept;

  //! Probability that a photon is missed when only `fired_mask` pixels are
  //! inactive.
  double miss_probability(std::uint32_t fired_mask) const noexcept;

  PixelEfficiencies sorted() const;

 private:
  std::vector<double> etas_;
};

//---------------------------------------------------------------------------//
/*!
 * P(n, m): probability of an n-click given m incident photons.
 *
 * Shape is (N+1) x (M+1); storage is row-major.
 */
class ProbabilityMatrix {
 public:
  //! Validating constructor. Column sums are checked against
  //! `column_sum_tolerance`, which callers loosen for rounded reference data.
  ProbabilityMatrix(std::size_t n_pixels, std::size_t max_photons,
                    std::vector<double> row_major,
                    double column_sum_tolerance = 1e-9);

  std::size_t n_pixels() const noexcept { return n_pixels_; }
  std::size_t max_photons() const noexcept { return max_photons_; }
  std::size_t rows() const noexcept { return n_pixels_ + 1; }
  std::size_t cols() const noexcept { return max_photons_ + 1; }

  double operator()(std::size_t n, std::size_t m) const {
    return entries_[n * cols() + m];
  }
  std::span<const double> entries() const noexcept { return entries_; }

 private:
  std::size_t n_pixels_;
  std::size_t max_photons_;
  std::vector<double> entries_;
};

//---------------------------------------------------------------------------//
/*!
 * Distribution over which pixels have fired within the current pulse.
 *
 * Index is the bitmask of fired pixels; bit j set means pixel j is inactive.
 */
class ActiveSubsetDistribution {
 public:
  //! Start of a pulse: no pixel has fired.
  explicit ActiveSubsetDistribution(std::size_t n_pixels);
  ActiveSubsetDistribution(std::size_t n_pixels, std::vector<double> probabilities);

  std::size_t n_pixels() const noexcept { return n_pixels_; }
  std::span<const double> probabilities() const noexcept { return probs_; }
  double probability(std::uint32_t fired_mask) const { return probs_.at(fired_mask); }

  //! Probability mass on subsets with exactly n fired pixels.
  double fired_count_probability(std::size_t n) const;

 private:
  std::size_t n_pixels_;
  std::vector<double> probs_;
};

//! Absorbs one more photon: active pixel j fires with probability eta_j,
//! otherwise the photon is missed.
ActiveSubsetDistribution evolve_one_photon(const ActiveSubsetDistribution& state,
                                           const PixelEfficiencies& etas);

//! Full (N+1) x (M+1) matrix via the subset-state recursion.
ProbabilityMatrix build_p_matrix(const PixelEfficiencies& etas, std::size_t max_photons);

/// Literal enumeration of P(n, m): sums over the ordered positions of the n
/// detected photons among the m incident ones and over the ordered sequence of
/// distinct pixels that fired, with miss factors raised to the gap lengths.
/// Independent of build_p_matrix and used as its oracle. Returns 0 for n > m;
/// throws for n > N.
double enumerate_pnm_closed_form(const PixelEfficiencies& etas, std::size_t n,
                                 std::size_t m);

}  // namespace psnspd
