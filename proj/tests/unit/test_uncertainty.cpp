#include <cmath>

#include "doctest.h"

#include "core/error.hpp"
#include "core/uncertainty.hpp"
#include "support/oracles.hpp"

using namespace psnspd;

TEST_SUITE("uncertainty") {

TEST_CASE("flux error budget") {
  CHECK(std::abs(flux_relative_uncertainty({0.0252, 0.0019, 0.0012}) - 0.0253) < 0.0002);
  CHECK(flux_relative_uncertainty({0, 0, 0}) == 0.0);
  CHECK(flux_relative_uncertainty({0.03, 0, 0}) == doctest::Approx(0.03));
  CHECK(flux_relative_uncertainty({0, 0, 0.01}) == doctest::Approx(0.01 * std::sqrt(3.0)));
  CHECK_THROWS_AS(flux_relative_uncertainty({-0.01, 0, 0}), Error);
  // monotone in each component
  const FluxErrorBudget base{0.01, 0.01, 0.01};
  const double b = flux_relative_uncertainty(base);
  CHECK(flux_relative_uncertainty({0.02, 0.01, 0.01}) >= b);
  CHECK(flux_relative_uncertainty({0.01, 0.02, 0.01}) >= b);
  CHECK(flux_relative_uncertainty({0.01, 0.01, 0.02}) >= b);
}

TEST_CASE("resample_click_counts") {
  SUBCASE("degenerate distribution stays put") {
    const ClickStatistics q({1, 0, 0, 0, 0});
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = resample_click_counts(q, 1000, seed);
      CHECK(r[0] == 1.0);
      for (std::size_t n = 1; n < 5; ++n) CHECK(r[n] == 0.0);
    }
  }
  SUBCASE("binomial spread") {
    const ClickStatistics q({0.3, 0.5, 0.2});
    const auto r = resample_click_counts(q, 1'000'000, 8);
    CHECK(std::abs(r[1] - 0.5) < 4.0 * std::sqrt(0.25 / 1e6));
    CHECK(std::abs(r[0] + r[1] + r[2] - 1.0) < 1e-12);
  }
  SUBCASE("seeded") {
    const ClickStatistics q({0.3, 0.5, 0.2});
    CHECK(resample_click_counts(q, 5000, 4)[1] == resample_click_counts(q, 5000, 4)[1]);
  }
  CHECK_THROWS_AS(resample_click_counts(ClickStatistics({0.5, 0.5}), 0, 1), Error);
}

TEST_CASE("resample_mu") {
  CHECK(resample_mu(0.5, 0.0, 1) == 0.5);
  CHECK(resample_mu(0.0, 0.0253, 1) == 0.0);
  SplitMix64 rng(12345);
  const int draws = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double v = resample_mu(0.5, 0.0253, rng);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / draws;
  const double sd = std::sqrt(sum_sq / draws - mean * mean);
  CHECK(std::abs(mean - 0.5) < 0.0005);
  CHECK(std::abs(sd - 0.01265) < 0.05 * 0.01265);
  // heavy relative spread still yields nonnegative draws
  for (int i = 0; i < 1000; ++i) CHECK(resample_mu(1.0, 2.0, rng) >= 0.0);
}

TEST_CASE("matrix uncertainty without noise collapses") {
  // The 4-pixel fit is exactly determined, so count noise maps straight into
  // the efficiencies; 1e12 trials keeps that spread far below 1e-3.
  const auto p = build_p_matrix(PixelEfficiencies(psnspd::testing::kReferenceEtas), 9);
  const auto q = forward_map(p, poisson_statistics(0.5, 9));
  UncertaintyOptions opts;
  opts.n_mc_sets = 8;
  opts.n_trials_per_set = 1'000'000'000'000;
  opts.threads = 4;
  const auto u = matrix_uncertainty(q, 0.5, 4, {0, 0, 0}, opts);
  CHECK(u.n_trials == 8);
  for (double s : u.sigma_matrix) CHECK(s < 1e-3);
}

TEST_CASE("matrix uncertainty structure and determinism") {
  const auto p = build_p_matrix(PixelEfficiencies({0.1, 0.3, 0.4}), 6);
  const auto q = forward_map(p, poisson_statistics(0.7, 6));
  UncertaintyOptions opts;
  opts.n_mc_sets = 12;
  opts.n_trials_per_set = 1'000'000;
  opts.max_photons = 6;
  opts.seed = 5;
  opts.threads = 1;
  const auto a = matrix_uncertainty(q, 0.7, 3, {}, opts);
  opts.threads = 5;
  const auto b = matrix_uncertainty(q, 0.7, 3, {}, opts);
  CHECK(a.sigma_matrix == b.sigma_matrix);
  CHECK(a.etas_mean == b.etas_mean);

  const auto& mean = a.mean_matrix;
  for (std::size_t m = 0; m < mean.cols(); ++m) {
    double col = 0.0;
    for (std::size_t n = 0; n < mean.rows(); ++n) {
      col += mean(n, m);
      if (n > m) CHECK(a.sigma(n, m) == 0.0);
    }
    CHECK(std::abs(col - 1.0) < 1e-9);
  }
  CHECK(a.sigma(0, 0) == 0.0);
  CHECK(a.sigma(1, 1) > 0.0);
  CHECK(a.etas_sigma.size() == 3);
  CHECK_THROWS_AS(matrix_uncertainty(q, 0.7, 3, {}, UncertaintyOptions{.n_mc_sets = 1}), Error);
}

}  // TEST_SUITE
