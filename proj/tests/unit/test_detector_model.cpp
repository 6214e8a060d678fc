#include <algorithm>
#include <random>

#include "doctest.h"

#include "core/detector_model.hpp"
#include "core/error.hpp"
#include "support/oracles.hpp"

using namespace psnspd;
using psnspd::testing::inclusion_exclusion_matrix;
using psnspd::testing::random_etas;

TEST_SUITE("detector_model") {

TEST_CASE("pixel efficiencies validate range and sum") {
  CHECK_NOTHROW(PixelEfficiencies({0.5, 0.5}));
  CHECK_NOTHROW(PixelEfficiencies({0.0}));
  CHECK_THROWS_AS(PixelEfficiencies({}), Error);
  CHECK_THROWS_AS(PixelEfficiencies({-0.1, 0.2}), Error);
  CHECK_THROWS_AS(PixelEfficiencies({1.2}), Error);
  CHECK_THROWS_AS(PixelEfficiencies({0.6, 0.5}), Error);
  CHECK_THROWS_AS(PixelEfficiencies({std::nan("")}), Error);
  CHECK(PixelEfficiencies({0.2, 0.3}).total() == doctest::Approx(0.5));
}

TEST_CASE("evolve_one_photon examples") {
  SUBCASE("zero efficiency keeps the empty set") {
    const auto s = evolve_one_photon(ActiveSubsetDistribution(2), PixelEfficiencies({0, 0}));
    CHECK(s.probability(0b00) == 1.0);
    CHECK(s.probability(0b01) == 0.0);
    CHECK(s.probability(0b10) == 0.0);
  }
  SUBCASE("unit efficiency always fires") {
    const auto s = evolve_one_photon(ActiveSubsetDistribution(1), PixelEfficiencies({1.0}));
    CHECK(s.probability(0b0) == 0.0);
    CHECK(s.probability(0b1) == 1.0);
  }
  SUBCASE("two pixels") {
    const auto s = evolve_one_photon(ActiveSubsetDistribution(2), PixelEfficiencies({0.2, 0.3}));
    CHECK(s.probability(0b00) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.probability(0b01) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.probability(0b10) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(s.probability(0b11) == 0.0);
  }
  SUBCASE("fired pixels stay inactive") {
    // start with pixel 0 fired; only pixel 1 can absorb
    ActiveSubsetDistribution start(2, {0.0, 1.0, 0.0, 0.0});
    const auto s = evolve_one_photon(start, PixelEfficiencies({0.2, 0.3}));
    CHECK(s.probability(0b01) == doctest::Approx(0.7));
    CHECK(s.probability(0b11) == doctest::Approx(0.3));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(evolve_one_photon(ActiveSubsetDistribution(3), PixelEfficiencies({0.1})),
                    Error);
  }
}

TEST_CASE("closed form examples") {
  const PixelEfficiencies etas({0.2, 0.3});
  CHECK(enumerate_pnm_closed_form(etas, 0, 2) == doctest::Approx(0.25));
  CHECK(enumerate_pnm_closed_form(etas, 1, 1) == doctest::Approx(0.5));
  CHECK(enumerate_pnm_closed_form(etas, 2, 2) == doctest::Approx(0.12));
  CHECK(enumerate_pnm_closed_form(etas, 2, 1) == 0.0);
  CHECK(enumerate_pnm_closed_form(etas, 0, 0) == 1.0);
  CHECK_THROWS_AS(enumerate_pnm_closed_form(etas, 3, 5), Error);

  // P_12 by hand: click on photon 1 then miss with the other pixel active,
  // or miss first then click.
  const double p12 = 0.2 * 0.7 + 0.3 * 0.8 + 0.5 * 0.5;
  CHECK(enumerate_pnm_closed_form(etas, 1, 2) == doctest::Approx(p12).epsilon(1e-14));
}

TEST_CASE("build_p_matrix matches the closed form and inclusion-exclusion for 2 pixels") {
  const std::vector<double> raw = {0.2, 0.3};
  const PixelEfficiencies etas(raw);
  const auto p = build_p_matrix(etas, 3);
  const auto ie = inclusion_exclusion_matrix(raw, 3);
  REQUIRE(p.rows() == 3);
  REQUIRE(p.cols() == 4);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t m = 0; m < 4; ++m) {
      CHECK(std::abs(p(n, m) - enumerate_pnm_closed_form(etas, n, m)) < 1e-12);
      CHECK(std::abs(p(n, m) - ie[n][m]) < 1e-12);
    }
}

TEST_CASE("blind detector") {
  const auto p = build_p_matrix(PixelEfficiencies({0, 0, 0, 0}), 6);
  for (std::size_t m = 0; m <= 6; ++m) {
    CHECK(p(0, m) == 1.0);
    for (std::size_t n = 1; n <= 4; ++n) CHECK(p(n, m) == 0.0);
  }
}

TEST_CASE("reference efficiencies reproduce the reference matrix") {
  const auto p = build_p_matrix(PixelEfficiencies(psnspd::testing::kReferenceEtas), 9);
  CHECK(p(1, 1) == doctest::Approx(0.924).epsilon(0.01 / 0.924));
  CHECK(std::abs(p(0, 1) - 0.076) < 0.01);
  CHECK(std::abs(p(2, 2) - 0.487) < 0.01);
  CHECK(std::abs(p(3, 3) - 0.092) < 0.01);
  CHECK(std::abs(p(4, 4) - 0.0058) < 0.002);
  for (std::size_t n = 0; n < 5; ++n)
    for (std::size_t m = 0; m < 10; ++m)
      CHECK(std::abs(p(n, m) - psnspd::testing::kReferenceMatrix[n][m]) < 0.01);
}

TEST_CASE("single pixel reduces to 1 - (1 - eta)^m") {
  const double eta = 0.37;
  const auto p = build_p_matrix(PixelEfficiencies({eta}), 12);
  for (std::size_t m = 0; m <= 12; ++m) {
    CHECK(std::abs(p(0, m) - std::pow(1 - eta, m)) < 1e-14);
    CHECK(std::abs(p(1, m) - (1 - std::pow(1 - eta, m))) < 1e-14);
  }
}

TEST_CASE("sum of efficiencies equal to one is allowed") {
  const PixelEfficiencies etas({0.5, 0.5});
  const auto p = build_p_matrix(etas, 2);
  CHECK(p(0, 2) == 0.0);
  CHECK(p(1, 2) == doctest::Approx(0.5));
  CHECK(p(2, 2) == doctest::Approx(0.5));
}

TEST_CASE("property: stochastic columns, triangular support, symmetry, saturation") {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n_pixels = 1 + trial % 5;
    auto raw = random_etas(rng, n_pixels);
    const auto p = build_p_matrix(PixelEfficiencies(raw), 9);
    for (std::size_t m = 0; m <= 9; ++m) {
      double sum = 0.0;
      for (std::size_t n = 0; n <= n_pixels; ++n) {
        sum += p(n, m);
        if (n > m) CHECK(p(n, m) == 0.0);
        CHECK(p(n, m) >= 0.0);
        CHECK(p(n, m) <= 1.0);
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    CHECK(p(0, 0) == 1.0);

    auto shuffled = raw;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto q = build_p_matrix(PixelEfficiencies(shuffled), 9);
    for (std::size_t k = 0; k < p.entries().size(); ++k)
      CHECK(std::abs(p.entries()[k] - q.entries()[k]) < 1e-12);

    for (std::size_t m = 1; m <= 9; ++m)
      CHECK(p(n_pixels, m) >= p(n_pixels, m - 1) - 1e-15);
  }
}

TEST_CASE("property: recursion equals closed-form enumeration for N <= 4") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n_pixels = 1 + trial % 4;
    const auto raw = random_etas(rng, n_pixels);
    const PixelEfficiencies etas(raw);
    const auto p = build_p_matrix(etas, 9);
    const auto ie = inclusion_exclusion_matrix(raw, 9);
    for (std::size_t m = 0; m <= 9; ++m)
      for (std::size_t n = 0; n <= n_pixels; ++n) {
        CHECK(std::abs(p(n, m) - enumerate_pnm_closed_form(etas, n, m)) < 1e-12);
        CHECK(std::abs(p(n, m) - ie[n][m]) < 1e-12);
      }
  }
}

TEST_CASE("matrix constructor rejects malformed entries") {
  CHECK_THROWS_AS(ProbabilityMatrix(1, 1, {1, 0.5, 0, 0.5, 0}), Error);
  CHECK_THROWS_AS(ProbabilityMatrix(1, 1, {0.5, 0.5, 0.5, 0.5}), Error);  // below diagonal
  CHECK_THROWS_AS(ProbabilityMatrix(1, 1, {1, 0.7, 0, 0.5}), Error);      // column sum
  CHECK_NOTHROW(ProbabilityMatrix(1, 1, {1, 0.5, 0, 0.5}));
}

}  // TEST_SUITE
