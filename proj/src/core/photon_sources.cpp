#include "core/photon_sources.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "core/error.hpp"

namespace psnspd {

PhotonStatistics::PhotonStatistics(std::vector<double> probs, std::optional<double> mu)
    : probs_(std::move(probs)), mu_(mu) {
  if (probs_.empty()) fail(ErrorCode::InvalidArgument, "photon statistics cannot be empty");
  if (mu_ && (!std::isfinite(*mu_) || *mu_ < 0.0))
    fail(ErrorCode::InvalidArgument, "mean photon number must be >= 0");
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0)
      fail(ErrorCode::InvalidArgument, "photon probabilities must be nonnegative");
    sum += p;
  }
  if (sum > 1.0 + 1e-12)
    fail(ErrorCode::InvalidArgument, "photon probabilities sum to more than 1");
  tail_mass_ = std::max(0.0, 1.0 - sum);
}

ClickStatistics::ClickStatistics(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2)
    fail(ErrorCode::InvalidArgument, "click statistics need at least the 0- and 1-click bins");
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0)
      fail(ErrorCode::InvalidArgument, "click probabilities must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    fail(ErrorCode::InvalidArgument, "click probabilities must sum to 1");
}

PhotonStatistics poisson_statistics(double mu, std::size_t max_photons) {
  if (!std::isfinite(mu) || mu < 0.0)
    fail(ErrorCode::InvalidArgument, "mean photon number must be >= 0");
  std::vector<double> probs(max_photons + 1, 0.0);
  if (mu == 0.0) {
    probs[0] = 1.0;
  } else {
    // Log space keeps large mu from underflowing e^-mu.
    const double log_mu = std::log(mu);
    for (std::size_t m = 0; m <= max_photons; ++m) {
      const double k = static_cast<double>(m);
      probs[m] = std::exp(k * log_mu - mu - std::lgamma(k + 1.0));
    }
  }
  return PhotonStatistics(std::move(probs), mu);
}

std::vector<double> forward_map_raw(const ProbabilityMatrix& p, const PhotonStatistics& s) {
  if (s.probs().size() != p.cols())
    fail(ErrorCode::DimensionMismatch,
         "photon statistics length " + std::to_string(s.probs().size()) +
             " does not match matrix columns " + std::to_string(p.cols()));
  std::vector<double> q(p.rows(), 0.0);
  for (std::size_t n = 0; n < p.rows(); ++n)
    for (std::size_t m = n; m < p.cols(); ++m) q[n] += p(n, m) * s[m];
  return q;
}

ClickStatistics forward_map(const ProbabilityMatrix& p, const PhotonStatistics& s) {
  auto q = forward_map_raw(p, s);
  const double sum = std::accumulate(q.begin(), q.end(), 0.0);
  if (!(sum > 0.0))
    fail(ErrorCode::InvalidArgument, "photon statistics carry no probability mass");
  for (double& v : q) v /= sum;
  return ClickStatistics(std::move(q));
}

}  // namespace psnspd
