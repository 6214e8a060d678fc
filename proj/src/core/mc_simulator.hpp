#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "core/detector_model.hpp"
#include "core/photon_sources.hpp"
#include "core/random.hpp"

namespace psnspd {

//! Poisson source sampled exactly on the fly.
struct PoissonSource {
  double mu = 0.0;
};

using PulseSource = std::variant<PoissonSource, PhotonStatistics>;

struct SimulationConfig {
  PixelEfficiencies etas;
  PulseSource source;
  std::uint64_t n_pulses = 1;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct ClickCountsHistogram {
  std::vector<std::uint64_t> counts;  // index n: pulses with exactly n pixels fired
  std::uint64_t n_pulses = 0;
  std::uint64_t seed = 0;
};

/// Exact Poisson draw by sequential inversion; falls back to the standard
/// library sampler for means where e^-mu would underflow.
std::uint64_t sample_poisson(double mu, SplitMix64& rng);

//! Number of distinct pixels fired by `photons` sequential photons.
std::size_t sample_pulse_clicks(const PixelEfficiencies& etas, std::uint64_t photons,
                                SplitMix64& rng);

/// Simulates n_pulses independent pulses. Pulse i draws from its own stream
/// keyed by (seed, i), so the histogram is bit-identical for any thread count.
ClickCountsHistogram simulate_pulses(const SimulationConfig& cfg);

}  // namespace psnspd
