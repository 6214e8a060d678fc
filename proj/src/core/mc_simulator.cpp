#include "core/mc_simulator.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace psnspd {
namespace {

constexpr double kInversionMuLimit = 500.0;

class CategoricalSampler {
 public:
  explicit CategoricalSampler(const PhotonStatistics& s) {
    const auto probs = s.probs();
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (!(total > 0.0))
      fail(ErrorCode::InvalidArgument, "photon statistics carry no probability mass");
    cdf_.resize(probs.size());
    double acc = 0.0;
    for (std::size_t m = 0; m < probs.size(); ++m) {
      acc += probs[m] / total;
      cdf_[m] = acc;
    }
    cdf_.back() = 1.0;
  }

  std::uint64_t operator()(SplitMix64& rng) const {
    const double u = rng.uniform();
    std::size_t m = 0;
    while (m + 1 < cdf_.size() && u >= cdf_[m]) ++m;
    return m;
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

std::uint64_t sample_poisson(double mu, SplitMix64& rng) {
  if (!std::isfinite(mu) || mu < 0.0)
    fail(ErrorCode::InvalidArgument, "mean photon number must be >= 0");
  if (mu == 0.0) return 0;
  if (mu > kInversionMuLimit) {
    std::poisson_distribution<std::uint64_t> dist(mu);
    return dist(rng);
  }
  const double u = rng.uniform();
  double p = std::exp(-mu);
  double cdf = p;
  std::uint64_t k = 0;
  while (u >= cdf) {
    ++k;
    p *= mu / static_cast<double>(k);
    const double next = cdf + p;
    if (next == cdf) break;  // remaining tail below double resolution
    cdf = next;
  }
  return k;
}

std::size_t sample_pulse_clicks(const PixelEfficiencies& etas, std::uint64_t photons,
                                SplitMix64& rng) {
  const std::size_t n_pixels = etas.size();
  std::uint32_t fired = 0;
  std::size_t clicks = 0;
  for (std::uint64_t k = 0; k < photons && clicks < n_pixels; ++k) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t j = 0; j < n_pixels; ++j) {
      const std::uint32_t bit = 1u << j;
      if (fired & bit) continue;
      acc += etas[j];
      if (u < acc) {
        fired |= bit;
        ++clicks;
        break;
      }
    }
  }
  return clicks;
}

ClickCountsHistogram simulate_pulses(const SimulationConfig& cfg) {
  if (cfg.n_pulses == 0) fail(ErrorCode::InvalidArgument, "n_pulses must be >= 1");

  std::optional<CategoricalSampler> categorical;
  double mu = 0.0;
  if (const auto* poisson = std::get_if<PoissonSource>(&cfg.source)) {
    if (!std::isfinite(poisson->mu) || poisson->mu < 0.0)
      fail(ErrorCode::InvalidArgument, "mean photon number must be >= 0");
    mu = poisson->mu;
  } else {
    categorical.emplace(std::get<PhotonStatistics>(cfg.source));
  }

  const std::size_t bins = cfg.etas.size() + 1;
  const unsigned workers = resolve_threads(cfg.threads);
  std::vector<std::vector<std::uint64_t>> partial(workers,
                                                  std::vector<std::uint64_t>(bins, 0));

  parallel_chunks(cfg.n_pulses, workers, [&](std::size_t begin, std::size_t end,
                                             std::size_t worker) {
    auto& local = partial[worker];
    for (std::size_t i = begin; i < end; ++i) {
      SplitMix64 rng = substream(cfg.seed, StreamDomain::Pulse, i);
      const std::uint64_t photons =
          categorical ? (*categorical)(rng) : sample_poisson(mu, rng);
      ++local[sample_pulse_clicks(cfg.etas, photons, rng)];
    }
  });

  ClickCountsHistogram hist{std::vector<std::uint64_t>(bins, 0), cfg.n_pulses, cfg.seed};
  for (const auto& local : partial)
    for (std::size_t n = 0; n < bins; ++n) hist.counts[n] += local[n];
  return hist;
}

}  // namespace psnspd
