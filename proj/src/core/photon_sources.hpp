#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "core/detector_model.hpp"

namespace psnspd {

/// Incident photon-number distribution S(m), m = 0..M. Truncated
/// distributions may sum below 1; the missing mass is kept as tail_mass.
class PhotonStatistics {
 public:
  explicit PhotonStatistics(std::vector<double> probs,
                            std::optional<double> mu = std::nullopt);

  std::size_t max_photons() const noexcept { return probs_.size() - 1; }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t m) const { return probs_[m]; }
  std::optional<double> mu() const noexcept { return mu_; }
  double tail_mass() const noexcept { return tail_mass_; }

 private:
  std::vector<double> probs_;
  std::optional<double> mu_;
  double tail_mass_ = 0.0;
};

/// Observed click distribution Q(n), n = 0..N. Sums to 1 within 1e-9.
class ClickStatistics {
 public:
  explicit ClickStatistics(std::vector<double> probs);

  std::size_t n_pixels() const noexcept { return probs_.size() - 1; }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t n) const { return probs_[n]; }

 private:
  std::vector<double> probs_;
};

//! Poisson statistics mu^m e^-mu / m! truncated at max_photons.
PhotonStatistics poisson_statistics(double mu, std::size_t max_photons);

//! Q = P S without tail handling; sums to sum(S).
std::vector<double> forward_map_raw(const ProbabilityMatrix& p, const PhotonStatistics& s);

//! Q = P S renormalized so the truncated tail does not leak out of Q.
ClickStatistics forward_map(const ProbabilityMatrix& p, const PhotonStatistics& s);

}  // namespace psnspd
