//---------------------------------------------------------------------------//
//! \file core/random.hpp
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <limits>

namespace psnspd {

//---------------------------------------------------------------------------//
/*!
 * SplitMix64 generator satisfying UniformRandomBitGenerator.
 *
 * Small state makes it cheap to create one stream per work item (pulse,
 * Monte Carlo set, fit restart). Streams are keyed by (seed, domain, index)
 * so results never depend on which thread ran the item or in what order.
 */
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  //! Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

//! Stream domains; keeps substreams for different purposes disjoint.
enum class StreamDomain : std::uint64_t {
  Pulse = 1,
  FitRestart = 2,
  MonteCarloSet = 3,
  Resample = 4,
};

//! Deterministic independent stream for work item `index` of `domain`.
constexpr SplitMix64 substream(std::uint64_t seed, StreamDomain domain,
                               std::uint64_t index) noexcept {
  std::uint64_t key = SplitMix64::mix(seed ^ 0x6A09E667F3BCC909ULL);
  key = SplitMix64::mix(key + static_cast<std::uint64_t>(domain) * 0xBB67AE8584CAA73BULL);
  key = SplitMix64::mix(key ^ (index * 0x3C6EF372FE94F82BULL + 0xA54FF53A5F1D36F1ULL));
  return SplitMix64(key);
}

}  // namespace psnspd
