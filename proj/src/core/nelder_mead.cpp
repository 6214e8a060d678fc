#include "core/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/error.hpp"

namespace psnspd {
namespace {

struct Simplex {
  std::vector<std::vector<double>> points;
  std::vector<double> values;
};

class Minimizer {
 public:
  Minimizer(const Objective& f, const NelderMeadOptions& options)
      : f_(f), options_(options) {}

  double evaluate(std::span<const double> x) {
    ++evaluations_;
    const double v = f_(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  bool budget_left() const { return evaluations_ < options_.max_evaluations; }
  std::size_t evaluations() const { return evaluations_; }

  // One full Nelder-Mead descent from an initial simplex. Returns whether a
  // tolerance was met (as opposed to running out of evaluations).
  bool descend(Simplex& s) {
    const std::size_t dim = s.points.size() - 1;
    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim), trial2(dim);

    auto point_along = [&](double t, std::vector<double>& out, std::size_t worst) {
      for (std::size_t k = 0; k < dim; ++k)
        out[k] = centroid[k] + t * (s.points[worst][k] - centroid[k]);
    };

    while (true) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second_worst = order[dim - (dim > 0 ? 1 : 0)];

      const double spread = s.values[worst] - s.values[best];
      if (spread <= options_.ftol * std::abs(s.values[best]) + options_.ftol_abs) return true;
      double diameter = 0.0;
      for (const auto& p : s.points)
        for (std::size_t k = 0; k < dim; ++k)
          diameter = std::max(diameter, std::abs(p[k] - s.points[best][k]));
      if (diameter <= options_.xtol) return true;
      if (!budget_left()) return false;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= dim; ++i) {
        if (i == worst) continue;
        for (std::size_t k = 0; k < dim; ++k) centroid[k] += s.points[i][k];
      }
      for (double& c : centroid) c /= static_cast<double>(dim);

      point_along(-1.0, trial, worst);
      const double reflected = evaluate(trial);
      if (reflected < s.values[best]) {
        point_along(-2.0, trial2, worst);
        const double expanded = evaluate(trial2);
        if (expanded < reflected) {
          s.points[worst] = trial2;
          s.values[worst] = expanded;
        } else {
          s.points[worst] = trial;
          s.values[worst] = reflected;
        }
        continue;
      }
      if (reflected < s.values[second_worst]) {
        s.points[worst] = trial;
        s.values[worst] = reflected;
        continue;
      }
      const bool outside = reflected < s.values[worst];
      point_along(outside ? -0.5 : 0.5, trial2, worst);
      const double contracted = evaluate(trial2);
      if (contracted < (outside ? reflected : s.values[worst])) {
        s.points[worst] = trial2;
        s.values[worst] = contracted;
        continue;
      }
      // shrink towards best
      for (std::size_t i = 0; i <= dim; ++i) {
        if (i == best) continue;
        for (std::size_t k = 0; k < dim; ++k)
          s.points[i][k] = s.points[best][k] + 0.5 * (s.points[i][k] - s.points[best][k]);
        s.values[i] = evaluate(s.points[i]);
      }
    }
  }

  Simplex simplex_around(const std::vector<double>& x, double fx,
                         std::span<const double> steps) {
    Simplex s;
    s.points.push_back(x);
    s.values.push_back(fx);
    for (std::size_t k = 0; k < x.size(); ++k) {
      auto p = x;
      p[k] += steps[k];
      s.values.push_back(evaluate(p));
      s.points.push_back(std::move(p));
    }
    return s;
  }

 private:
  const Objective& f_;
  NelderMeadOptions options_;
  std::size_t evaluations_ = 0;
};

std::size_t best_index(const Simplex& s) {
  return static_cast<std::size_t>(
      std::min_element(s.values.begin(), s.values.end()) - s.values.begin());
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             std::span<const double> initial_steps,
                             const NelderMeadOptions& options) {
  if (x0.empty()) fail(ErrorCode::InvalidArgument, "nelder_mead needs at least one variable");
  if (initial_steps.size() != x0.size())
    fail(ErrorCode::DimensionMismatch, "initial step count does not match dimension");

  Minimizer minimizer(f, options);
  const double f0 = minimizer.evaluate(x0);
  Simplex s = minimizer.simplex_around(x0, f0, initial_steps);
  bool converged = minimizer.descend(s);

  // Re-expand around the incumbent to escape premature simplex collapse.
  std::vector<double> steps(initial_steps.begin(), initial_steps.end());
  for (std::size_t r = 0; r < options.polish_restarts && converged; ++r) {
    const std::size_t b = best_index(s);
    const auto x_best = s.points[b];
    const double f_best = s.values[b];
    for (std::size_t k = 0; k < steps.size(); ++k)
      steps[k] = 0.1 * std::abs(x_best[k]) + 1e-3 * std::pow(0.1, static_cast<double>(r));
    s = minimizer.simplex_around(x_best, f_best, steps);
    converged = minimizer.descend(s);
    const double improved = s.values[best_index(s)];
    if (f_best - improved <= options.ftol * std::abs(f_best) + options.ftol_abs) break;
  }

  const std::size_t b = best_index(s);
  return {s.points[b], s.values[b], minimizer.evaluations(), converged};
}

}  // namespace psnspd
