#include "core/uncertainty.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace psnspd {
namespace {

constexpr int kMaxRedraws = 1000;

void check_rel(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0)
    fail(ErrorCode::InvalidArgument, std::string(name) + " must be a finite value >= 0");
}

}  // namespace

void FluxErrorBudget::validate() const {
  check_rel(sigma_pm_rel, "sigma_pm_rel");
  check_rel(sigma_op_rel, "sigma_op_rel");
  check_rel(sigma_at_rel, "sigma_at_rel");
}

double flux_relative_uncertainty(const FluxErrorBudget& budget) {
  budget.validate();
  return std::sqrt(budget.sigma_pm_rel * budget.sigma_pm_rel +
                   budget.sigma_op_rel * budget.sigma_op_rel +
                   3.0 * budget.sigma_at_rel * budget.sigma_at_rel);
}

ClickStatistics resample_click_counts(const ClickStatistics& q, std::uint64_t n_trials,
                                      SplitMix64& rng) {
  if (n_trials == 0) fail(ErrorCode::InvalidArgument, "n_trials must be >= 1");
  const auto probs = q.probs();
  std::vector<std::uint64_t> counts(probs.size());
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    std::uint64_t clicked = 0;
    for (std::size_t n = 1; n < probs.size(); ++n) {
      std::binomial_distribution<std::uint64_t> coin(n_trials, std::min(1.0, probs[n]));
      counts[n] = coin(rng);
      clicked += counts[n];
    }
    if (clicked > n_trials) continue;
    counts[0] = n_trials - clicked;
    std::vector<double> out(probs.size());
    const double total = static_cast<double>(n_trials);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = static_cast<double>(counts[n]) / total;
    return ClickStatistics(std::move(out));
  }
  fail(ErrorCode::NotConverged, "resampled click counts repeatedly exceeded n_trials");
}

ClickStatistics resample_click_counts(const ClickStatistics& q, std::uint64_t n_trials,
                                      std::uint64_t seed) {
  SplitMix64 rng = substream(seed, StreamDomain::Resample, 0);
  return resample_click_counts(q, n_trials, rng);
}

double resample_mu(double mu, double rel_sigma, SplitMix64& rng) {
  if (!std::isfinite(mu) || mu < 0.0)
    fail(ErrorCode::InvalidArgument, "mean photon number must be >= 0");
  check_rel(rel_sigma, "relative sigma");
  if (mu == 0.0 || rel_sigma == 0.0) return mu;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    std::normal_distribution<double> gauss(mu, rel_sigma * mu);
    const double draw = gauss(rng);
    if (draw >= 0.0) return draw;
  }
  fail(ErrorCode::NotConverged, "could not draw a nonnegative mean photon number");
}

double resample_mu(double mu, double rel_sigma, std::uint64_t seed) {
  SplitMix64 rng = substream(seed, StreamDomain::Resample, 1);
  return resample_mu(mu, rel_sigma, rng);
}

MatrixUncertainty matrix_uncertainty(const ClickStatistics& q_observed, double mu,
                                     std::size_t n_pixels, const FluxErrorBudget& budget,
                                     const UncertaintyOptions& options) {
  if (options.n_mc_sets < 2) fail(ErrorCode::InvalidArgument, "n_mc_sets must be >= 2");
  if (q_observed.n_pixels() != n_pixels)
    fail(ErrorCode::DimensionMismatch, "click statistics do not match the pixel count");
  const double flux_sigma = flux_relative_uncertainty(budget);
  const std::size_t rows = n_pixels + 1;
  const std::size_t cols = options.max_photons + 1;

  struct Trial {
    std::vector<double> entries;
    std::vector<double> etas;
  };
  std::vector<std::optional<Trial>> trials(options.n_mc_sets);

  parallel_chunks(options.n_mc_sets, options.threads,
                  [&](std::size_t begin, std::size_t end, std::size_t) {
                    for (std::size_t i = begin; i < end; ++i) {
                      SplitMix64 rng = substream(options.seed, StreamDomain::MonteCarloSet, i);
                      const ClickStatistics q =
                          resample_click_counts(q_observed, options.n_trials_per_set, rng);
                      const double mu_i = resample_mu(mu, flux_sigma, rng);
                      const PhotonStatistics s = poisson_statistics(mu_i, options.max_photons);

                      FitOptions fit = options.fit;
                      fit.seed = rng();
                      fit.threads = 1;
                      const FitResult r = fit_efficiencies(q, s, n_pixels, fit);
                      if (!r.converged) continue;
                      const ProbabilityMatrix p = build_p_matrix(r.etas, options.max_photons);
                      const auto e = r.etas.values();
                      trials[i] = Trial{{p.entries().begin(), p.entries().end()},
                                        {e.begin(), e.end()}};
                    }
                  });

  std::size_t accepted = 0;
  for (const auto& t : trials) accepted += t.has_value();
  const std::size_t discarded = options.n_mc_sets - accepted;
  if (accepted < 2 || static_cast<double>(discarded) >
                          options.max_discard_fraction * static_cast<double>(options.n_mc_sets))
    fail(ErrorCode::NotConverged, std::to_string(discarded) + " of " +
                                      std::to_string(options.n_mc_sets) +
                                      " Monte Carlo fits did not converge");

  auto mean_and_sigma = [&](auto get, std::size_t size) {
    std::vector<double> mean(size, 0.0), sigma(size, 0.0);
    for (const auto& t : trials)
      if (t)
        for (std::size_t k = 0; k < size; ++k) mean[k] += get(*t)[k];
    for (double& v : mean) v /= static_cast<double>(accepted);
    for (const auto& t : trials)
      if (t)
        for (std::size_t k = 0; k < size; ++k) {
          const double d = get(*t)[k] - mean[k];
          sigma[k] += d * d;
        }
    for (double& v : sigma) v = std::sqrt(v / static_cast<double>(accepted - 1));
    return std::pair{std::move(mean), std::move(sigma)};
  };

  auto [p_mean, p_sigma] =
      mean_and_sigma([](const Trial& t) -> const std::vector<double>& { return t.entries; },
                     rows * cols);
  auto [e_mean, e_sigma] =
      mean_and_sigma([](const Trial& t) -> const std::vector<double>& { return t.etas; },
                     n_pixels);

  return {ProbabilityMatrix(n_pixels, options.max_photons, std::move(p_mean), 1e-9),
          std::move(p_sigma),
          std::move(e_mean),
          std::move(e_sigma),
          accepted,
          discarded};
}

}  // namespace psnspd
