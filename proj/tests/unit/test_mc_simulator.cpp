#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <random>

#include "doctest.h"

#include "core/detector_model.hpp"
#include "core/error.hpp"
#include "core/mc_simulator.hpp"
#include "support/oracles.hpp"

using namespace psnspd;

namespace {

double chi_square_p_value(const ClickCountsHistogram& hist, std::span<const double> expected) {
  double stat = 0.0;
  int dof = -1;
  for (std::size_t n = 0; n < hist.counts.size(); ++n) {
    const double e = expected[n] * static_cast<double>(hist.n_pulses);
    if (e < 5.0) continue;
    const double d = static_cast<double>(hist.counts[n]) - e;
    stat += d * d / e;
    ++dof;
  }
  if (dof < 1) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
}

}  // namespace

TEST_SUITE("mc_simulator") {

TEST_CASE("certain detection") {
  SimulationConfig cfg{PixelEfficiencies({1.0}), PhotonStatistics({0.0, 1.0}), 1000, 3, 2};
  const auto hist = simulate_pulses(cfg);
  CHECK(hist.counts == std::vector<std::uint64_t>{0, 1000});
  CHECK(hist.n_pulses == 1000);
}

TEST_CASE("two half-efficient pixels with two photons") {
  const PixelEfficiencies etas({0.5, 0.5});
  SimulationConfig cfg{etas, PhotonStatistics({0.0, 0.0, 1.0}), 400000, 11, 4};
  const auto hist = simulate_pulses(cfg);
  CHECK(hist.counts[0] == 0);
  for (std::size_t n = 1; n <= 2; ++n) {
    const double p = enumerate_pnm_closed_form(etas, n, 2);
    const double freq = static_cast<double>(hist.counts[n]) / 400000.0;
    CHECK(std::abs(freq - p) < 4.0 * std::sqrt(p * (1 - p) / 400000.0));
  }
}

TEST_CASE("poisson sampler matches the pmf") {
  const double mu = 1.7;
  const std::size_t draws = 400000;
  std::vector<std::uint64_t> counts(12, 0);
  for (std::size_t i = 0; i < draws; ++i) {
    SplitMix64 rng = substream(5, StreamDomain::Pulse, i);
    const auto k = sample_poisson(mu, rng);
    ++counts[std::min<std::uint64_t>(k, 11)];
  }
  const auto pmf = psnspd::testing::poisson_pmf(mu, 10);
  for (std::size_t k = 0; k <= 6; ++k) {
    const double freq = static_cast<double>(counts[k]) / draws;
    CHECK(std::abs(freq - pmf[k]) < 4.0 * std::sqrt(pmf[k] * (1 - pmf[k]) / draws));
  }
  SplitMix64 rng(1);
  CHECK(sample_poisson(0.0, rng) == 0);
  CHECK_THROWS_AS(sample_poisson(-1.0, rng), Error);
}

TEST_CASE("empirical frequencies agree with the analytic forward map") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 4; ++trial) {
    const auto raw = psnspd::testing::random_etas(gen, 2 + trial % 3, false);
    const double mu = 0.3 + 0.4 * trial;
    SimulationConfig cfg{PixelEfficiencies(raw), PoissonSource{mu}, 1'000'000,
                         static_cast<std::uint64_t>(trial), 0};
    const auto hist = simulate_pulses(cfg);
    const auto p = psnspd::testing::inclusion_exclusion_matrix(raw, 40);
    const auto s = psnspd::testing::poisson_pmf(mu, 40);
    std::vector<double> q(raw.size() + 1, 0.0);
    for (std::size_t n = 0; n < q.size(); ++n)
      for (std::size_t m = 0; m <= 40; ++m) q[n] += p[n][m] * s[m];
    CHECK(chi_square_p_value(hist, q) > 0.001);
  }
}

TEST_CASE("seeded runs are reproducible for any thread count") {
  SimulationConfig cfg{PixelEfficiencies(psnspd::testing::kReferenceEtas), PoissonSource{0.5},
                       200'003, 42, 1};
  const auto serial = simulate_pulses(cfg);
  for (unsigned threads : {2u, 3u, 8u}) {
    cfg.threads = threads;
    CHECK(simulate_pulses(cfg).counts == serial.counts);
  }
  cfg.seed = 43;
  CHECK(simulate_pulses(cfg).counts != serial.counts);
}

TEST_CASE("invalid configuration") {
  SimulationConfig cfg{PixelEfficiencies({0.5}), PoissonSource{0.5}, 0, 1, 1};
  CHECK_THROWS_AS(simulate_pulses(cfg), Error);
  cfg.n_pulses = 10;
  cfg.source = PoissonSource{-2.0};
  CHECK_THROWS_AS(simulate_pulses(cfg), Error);
}

}  // TEST_SUITE
