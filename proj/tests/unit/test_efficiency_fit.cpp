#include <algorithm>

#include "doctest.h"

#include "core/detector_model.hpp"
#include "core/efficiency_fit.hpp"
#include "core/error.hpp"
#include "support/oracles.hpp"

using namespace psnspd;

namespace {

ClickStatistics exact_clicks(const std::vector<double>& etas, double mu, std::size_t m = 9) {
  return forward_map(build_p_matrix(PixelEfficiencies(etas), m), poisson_statistics(mu, m));
}

}  // namespace

TEST_SUITE("efficiency_fit") {

TEST_CASE("noise-free round trip recovers the generating efficiencies") {
  const auto q = exact_clicks(psnspd::testing::kReferenceEtas, 0.5);
  const auto fit = fit_efficiencies(q, poisson_statistics(0.5, 9), 4);
  auto expected = psnspd::testing::kReferenceEtas;
  std::sort(expected.begin(), expected.end());
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(fit.etas[i] - expected[i]) < 1e-3);
  CHECK(fit.residual_norm < 1e-8);
  CHECK(fit.converged);
  CHECK(fit.n_restarts_used == 17);
  CHECK(std::abs(fit.etas.total() - 0.9241) < 0.01);
  CHECK(std::is_sorted(fit.etas.values().begin(), fit.etas.values().end()));
}

TEST_CASE("returned residual never exceeds any start residual") {
  const auto q = exact_clicks({0.1, 0.25, 0.4}, 0.8);
  const auto fit = fit_efficiencies(q, poisson_statistics(0.8, 9), 3);
  REQUIRE(fit.start_residuals.size() == fit.n_restarts_used);
  for (double r : fit.start_residuals) CHECK(fit.residual_norm <= r);
}

TEST_CASE("blind detector fits to zero efficiency") {
  const ClickStatistics q({1, 0, 0, 0, 0});
  const auto fit = fit_efficiencies(q, poisson_statistics(0.5, 9), 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(fit.etas[i] < 1e-6);
  CHECK(fit.residual_norm < 1e-8);
}

TEST_CASE("vacuum input is reported as non-converged") {
  const ClickStatistics q({1, 0, 0, 0, 0});
  const auto fit = fit_efficiencies(q, poisson_statistics(0.0, 9), 4);
  CHECK_FALSE(fit.converged);
  CHECK(fit.n_restarts_used == 0);
}

TEST_CASE("joint fit over several mean photon numbers") {
  const std::vector<double> etas{0.05, 0.3, 0.45};
  std::vector<FitObservation> obs;
  for (double mu : {0.1, 0.5, 2.0})
    obs.push_back({exact_clicks(etas, mu), poisson_statistics(mu, 9)});
  const auto fit = fit_efficiencies(obs, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(fit.etas[i] - etas[i]) < 1e-3);
  CHECK(fit.residual_norm < 1e-8);
  CHECK(fit_residual_norm(obs, PixelEfficiencies(etas)) < 1e-14);
}

TEST_CASE("fit is deterministic for a seed and independent of thread count") {
  const auto q = exact_clicks({0.2, 0.2, 0.3}, 0.4);
  FitOptions opts;
  opts.seed = 17;
  const auto a = fit_efficiencies(q, poisson_statistics(0.4, 9), 3, opts);
  opts.threads = 4;
  const auto b = fit_efficiencies(q, poisson_statistics(0.4, 9), 3, opts);
  CHECK(a.residual_norm == b.residual_norm);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.etas[i] == b.etas[i]);
}

TEST_CASE("dimension errors") {
  const ClickStatistics q({0.5, 0.5});
  CHECK_THROWS_AS(fit_efficiencies(q, poisson_statistics(0.5, 9), 3), Error);
  std::vector<FitObservation> none;
  CHECK_THROWS_AS(fit_efficiencies(none, 2), Error);
}

}  // TEST_SUITE
