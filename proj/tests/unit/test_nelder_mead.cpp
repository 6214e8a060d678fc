#include <cmath>

#include "doctest.h"

#include "core/nelder_mead.hpp"

using namespace psnspd;

TEST_CASE("nelder_mead minimizes a shifted quadratic") {
  const Objective f = [](std::span<const double> x) {
    return (x[0] - 1.5) * (x[0] - 1.5) + 10.0 * (x[1] + 0.25) * (x[1] + 0.25);
  };
  const std::vector<double> steps{0.5, 0.5};
  const auto r = nelder_mead(f, {0.0, 0.0}, steps);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(-0.25).epsilon(1e-6));
  CHECK(r.value < 1e-12);
}

TEST_CASE("nelder_mead handles Rosenbrock") {
  const Objective f = [](std::span<const double> x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  const std::vector<double> steps{0.1, 0.1};
  const auto r = nelder_mead(f, {-1.2, 1.0}, steps);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("nelder_mead respects the evaluation budget") {
  const Objective f = [](std::span<const double> x) { return std::cos(x[0]) + x[0] * 1e-9; };
  NelderMeadOptions opts;
  opts.max_evaluations = 20;
  opts.xtol = 0.0;
  opts.ftol = 0.0;
  opts.ftol_abs = 0.0;
  const std::vector<double> steps{0.1};
  const auto r = nelder_mead(f, {0.3}, steps, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.evaluations <= 22);
}

TEST_CASE("nelder_mead never returns worse than the start") {
  const Objective f = [](std::span<const double> x) {
    return std::abs(x[0]) + std::abs(x[1] - 2.0) + std::sin(5 * x[0]) * 0.1;
  };
  const std::vector<double> steps{1.0, 1.0};
  const std::vector<double> x0{3.0, -1.0};
  const auto r = nelder_mead(f, x0, steps);
  CHECK(r.value <= f(x0));
}
