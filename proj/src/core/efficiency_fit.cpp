#include "core/efficiency_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "core/error.hpp"
#include "core/nelder_mead.hpp"
#include "core/parallel.hpp"
#include "core/random.hpp"

namespace psnspd {
namespace {

constexpr double kMaxStartTotal = 0.999;

std::vector<double> etas_from_free(std::span<const double> y) {
  double norm = 1.0;
  for (double v : y) norm += v * v;
  std::vector<double> etas(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) etas[i] = y[i] * y[i] / norm;
  return etas;
}

std::vector<double> free_from_etas(std::span<const double> etas) {
  const double total = std::accumulate(etas.begin(), etas.end(), 0.0);
  const double slack = std::max(1.0 - total, 1e-9);
  std::vector<double> y(etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i) y[i] = std::sqrt(etas[i] / slack);
  return y;
}

// Squared residual summed over observations. P is built once per call at the
// largest truncation present; each observation uses its own leading columns.
class ResidualObjective {
 public:
  ResidualObjective(std::span<const FitObservation> obs, std::size_t n_pixels)
      : obs_(obs), n_pixels_(n_pixels) {
    for (const auto& o : obs_) max_photons_ = std::max(max_photons_, o.s.max_photons());
  }

  double operator()(std::span<const double> etas_raw) const {
    const PixelEfficiencies etas{std::vector<double>(etas_raw.begin(), etas_raw.end())};
    const ProbabilityMatrix p = build_p_matrix(etas, max_photons_);
    double total = 0.0;
    std::vector<double> q(n_pixels_ + 1);
    for (const auto& o : obs_) {
      const auto s = o.s.probs();
      std::fill(q.begin(), q.end(), 0.0);
      double norm = 0.0;
      for (std::size_t n = 0; n <= n_pixels_; ++n) {
        for (std::size_t m = n; m < s.size(); ++m) q[n] += p(n, m) * s[m];
        norm += q[n];
      }
      for (std::size_t n = 0; n <= n_pixels_; ++n) {
        const double r = o.q[n] - q[n] / norm;
        total += r * r;
      }
    }
    return total;
  }

 private:
  std::span<const FitObservation> obs_;
  std::size_t n_pixels_;
  std::size_t max_photons_ = 0;
};

// Detection efficiency s of an equivalent single-pixel detector that
// reproduces the observed no-click fraction, found by bisection.
double estimate_total_efficiency(std::span<const FitObservation> obs) {
  auto predicted_zero = [&](double s_eff) {
    double total = 0.0;
    for (const auto& o : obs) {
      const auto s = o.s.probs();
      double mass = 0.0, zero = 0.0;
      for (std::size_t m = 0; m < s.size(); ++m) {
        zero += s[m] * std::pow(1.0 - s_eff, static_cast<double>(m));
        mass += s[m];
      }
      total += zero / mass - o.q[0];
    }
    return total;
  };
  double lo = 0.0, hi = kMaxStartTotal;
  if (predicted_zero(lo) <= 0.0) return 0.0;
  if (predicted_zero(hi) >= 0.0) return hi;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (predicted_zero(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> stratified_start(std::size_t n_pixels, std::size_t k, std::size_t count,
                                     std::uint64_t seed) {
  SplitMix64 rng = substream(seed, StreamDomain::FitRestart, k);
  const double total =
      kMaxStartTotal * (static_cast<double>(k) + rng.uniform()) / static_cast<double>(count);
  std::vector<double> weights(n_pixels);
  double sum = 0.0;
  for (double& w : weights) {
    w = -std::log1p(-rng.uniform());  // Exp(1): uniform split over the simplex
    sum += w;
  }
  for (double& w : weights) w = sum > 0.0 ? total * w / sum : total / n_pixels;
  return weights;
}

bool informative(std::span<const FitObservation> obs) {
  for (const auto& o : obs) {
    const auto s = o.s.probs();
    for (std::size_t m = 1; m < s.size(); ++m)
      if (s[m] > 0.0) return true;
  }
  return false;
}

struct StartOutcome {
  std::vector<double> etas_sorted;
  double value = 0.0;
  double start_value = 0.0;
  bool converged = false;
};

bool better(const StartOutcome& a, const StartOutcome& b) {
  if (a.value != b.value) return a.value < b.value;
  return std::lexicographical_compare(a.etas_sorted.begin(), a.etas_sorted.end(),
                                      b.etas_sorted.begin(), b.etas_sorted.end());
}

}  // namespace

double fit_residual_norm(std::span<const FitObservation> observations,
                         const PixelEfficiencies& etas) {
  if (observations.empty()) fail(ErrorCode::InvalidArgument, "no observations to fit");
  return std::sqrt(ResidualObjective(observations, etas.size())(etas.values()));
}

FitResult fit_efficiencies(std::span<const FitObservation> observations,
                           std::size_t n_pixels, const FitOptions& options) {
  if (observations.empty()) fail(ErrorCode::InvalidArgument, "no observations to fit");
  if (n_pixels == 0 || n_pixels > kMaxPixels)
    fail(ErrorCode::InvalidArgument, "unsupported pixel count");
  for (const auto& o : observations)
    if (o.q.n_pixels() != n_pixels)
      fail(ErrorCode::DimensionMismatch,
           "click statistics have " + std::to_string(o.q.probs().size()) +
               " bins but the detector has " + std::to_string(n_pixels) + " pixels");

  const ResidualObjective objective(observations, n_pixels);

  if (!informative(observations)) {
    // Only vacuum input: every efficiency vector predicts the same Q.
    std::vector<double> zeros(n_pixels, 0.0);
    const double residual = std::sqrt(objective(zeros));
    return {PixelEfficiencies(std::move(zeros)), residual, 0, false, {}};
  }

  std::vector<std::vector<double>> starts;
  starts.emplace_back(n_pixels, estimate_total_efficiency(observations) /
                                    static_cast<double>(n_pixels));
  for (std::size_t k = 0; k < options.n_restarts; ++k)
    starts.push_back(stratified_start(n_pixels, k, options.n_restarts, options.seed));

  NelderMeadOptions nm;
  nm.max_evaluations = options.max_evaluations;
  nm.ftol = options.ftol;
  nm.xtol = options.xtol;

  const ResidualObjective* obj = &objective;
  const Objective in_free_space = [obj](std::span<const double> y) {
    return (*obj)(etas_from_free(y));
  };

  std::vector<StartOutcome> outcomes(starts.size());
  parallel_chunks(starts.size(), options.threads,
                  [&](std::size_t begin, std::size_t end, std::size_t) {
                    for (std::size_t i = begin; i < end; ++i) {
                      auto y0 = free_from_etas(starts[i]);
                      std::vector<double> steps(y0.size());
                      for (std::size_t k = 0; k < y0.size(); ++k)
                        steps[k] = 0.1 * std::abs(y0[k]) + 0.05;
                      const auto result = nelder_mead(in_free_space, y0, steps, nm);
                      auto etas = etas_from_free(result.x);
                      std::sort(etas.begin(), etas.end());
                      outcomes[i] = {std::move(etas), result.value,
                                     objective(etas_from_free(y0)), result.converged};
                    }
                  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < outcomes.size(); ++i)
    if (better(outcomes[i], outcomes[best])) best = i;

  std::vector<double> start_residuals;
  start_residuals.reserve(outcomes.size());
  for (const auto& o : outcomes) start_residuals.push_back(std::sqrt(o.start_value));

  return {PixelEfficiencies(outcomes[best].etas_sorted), std::sqrt(outcomes[best].value),
          outcomes.size(), outcomes[best].converged, std::move(start_residuals)};
}

FitResult fit_efficiencies(const ClickStatistics& q, const PhotonStatistics& s,
                           std::size_t n_pixels, const FitOptions& options) {
  const FitObservation obs[] = {{q, s}};
  return fit_efficiencies(obs, n_pixels, options);
}

}  // namespace psnspd
