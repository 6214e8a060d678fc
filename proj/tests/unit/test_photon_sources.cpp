#include <numeric>

#include "doctest.h"

#include "core/error.hpp"
#include "core/photon_sources.hpp"
#include "support/oracles.hpp"

using namespace psnspd;

TEST_SUITE("photon_sources") {

TEST_CASE("poisson statistics") {
  SUBCASE("vacuum") {
    const auto s = poisson_statistics(0.0, 5);
    CHECK(s[0] == 1.0);
    for (std::size_t m = 1; m <= 5; ++m) CHECK(s[m] == 0.0);
    CHECK(s.tail_mass() == 0.0);
  }
  SUBCASE("mu = 0.1") {
    const auto s = poisson_statistics(0.1, 9);
    CHECK(s[0] == doctest::Approx(std::exp(-0.1)).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(0.1 * std::exp(-0.1)).epsilon(1e-14));
    CHECK(s[0] == doctest::Approx(0.904837).epsilon(1e-6));
    CHECK(s[1] == doctest::Approx(0.0904837).epsilon(1e-6));
    REQUIRE(s.mu().has_value());
    CHECK(*s.mu() == 0.1);
  }
  SUBCASE("M = 9 keeps more than 99.99% at mu = 2") {
    const auto s = poisson_statistics(2.0, 9);
    const double kept = std::accumulate(s.probs().begin(), s.probs().end(), 0.0);
    CHECK(kept >= 0.9999);
    CHECK(s.tail_mass() == doctest::Approx(1.0 - kept));
  }
  SUBCASE("mean converges to mu") {
    for (double mu : {0.1, 0.5, 1.0, 2.0}) {
      const auto s = poisson_statistics(mu, 9);
      double mean = 0.0;
      for (std::size_t m = 0; m <= 9; ++m) mean += m * s[m];
      CHECK(std::abs(mean - mu) < 1e-3);
    }
  }
  SUBCASE("large mu does not underflow") {
    const auto s = poisson_statistics(800.0, 900);
    CHECK(std::accumulate(s.probs().begin(), s.probs().end(), 0.0) > 0.99);
  }
  CHECK_THROWS_AS(poisson_statistics(-0.1, 3), Error);
}

TEST_CASE("statistics validation") {
  CHECK_THROWS_AS(PhotonStatistics({0.7, 0.7}), Error);
  CHECK_THROWS_AS(PhotonStatistics({-0.1, 0.5}), Error);
  CHECK_NOTHROW(PhotonStatistics({0.5, 0.4}));
  CHECK(PhotonStatistics({0.5, 0.4}).tail_mass() == doctest::Approx(0.1));
  CHECK_THROWS_AS(ClickStatistics({0.5, 0.4}), Error);
  CHECK_THROWS_AS(ClickStatistics({1.0}), Error);
  CHECK_NOTHROW(ClickStatistics({0.5, 0.5}));
}

TEST_CASE("forward map") {
  SUBCASE("perfect resolving detector is the identity") {
    const ProbabilityMatrix id(2, 2, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    const PhotonStatistics s({0.2, 0.5, 0.3});
    const auto q = forward_map(id, s);
    for (std::size_t n = 0; n < 3; ++n) CHECK(q[n] == doctest::Approx(s[n]));
  }
  SUBCASE("blind detector sees nothing") {
    const auto p = build_p_matrix(PixelEfficiencies({0, 0, 0}), 9);
    const auto q = forward_map(p, poisson_statistics(1.3, 9));
    CHECK(q[0] == doctest::Approx(1.0));
    for (std::size_t n = 1; n <= 3; ++n) CHECK(q[n] == 0.0);
  }
  SUBCASE("raw output keeps the truncated mass; renormalized sums to 1") {
    const auto p = build_p_matrix(PixelEfficiencies(psnspd::testing::kReferenceEtas), 3);
    const auto s = poisson_statistics(2.0, 3);
    const auto raw = forward_map_raw(p, s);
    const double raw_sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    CHECK(raw_sum == doctest::Approx(1.0 - s.tail_mass()).epsilon(1e-12));
    const auto q = forward_map(p, s);
    CHECK(std::abs(std::accumulate(q.probs().begin(), q.probs().end(), 0.0) - 1.0) < 1e-12);
  }
  SUBCASE("linearity before renormalization") {
    const auto p = build_p_matrix(PixelEfficiencies({0.1, 0.2, 0.3}), 4);
    const PhotonStatistics s1({0.1, 0.2, 0.3, 0.2, 0.2});
    const PhotonStatistics s2({0.6, 0.1, 0.1, 0.1, 0.1});
    const double a = 0.3;
    std::vector<double> mix(5);
    for (std::size_t m = 0; m < 5; ++m) mix[m] = a * s1[m] + (1 - a) * s2[m];
    const auto q_mix = forward_map_raw(p, PhotonStatistics(mix));
    const auto q1 = forward_map_raw(p, s1);
    const auto q2 = forward_map_raw(p, s2);
    for (std::size_t n = 0; n < q_mix.size(); ++n)
      CHECK(std::abs(q_mix[n] - (a * q1[n] + (1 - a) * q2[n])) < 1e-12);
  }
  SUBCASE("dimension mismatch") {
    const auto p = build_p_matrix(PixelEfficiencies({0.1}), 4);
    CHECK_THROWS_AS(forward_map(p, poisson_statistics(0.5, 3)), Error);
  }
}

}  // TEST_SUITE
