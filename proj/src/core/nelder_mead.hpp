#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace psnspd {

struct NelderMeadOptions {
  std::size_t max_evaluations = 100000;
  //! Stop when the simplex value spread is below ftol * |f_best| + ftol_abs.
  double ftol = 1e-12;
  double ftol_abs = 1e-30;
  //! Stop when every vertex lies within xtol of the best one (max norm).
  double xtol = 1e-9;
  //! Fresh simplices built around the best point after convergence.
  std::size_t polish_restarts = 4;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Unconstrained derivative-free minimization with the standard
/// reflection/expansion/contraction/shrink coefficients (1, 2, 1/2, 1/2).
/// `initial_steps` sets the initial simplex edge along each axis.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             std::span<const double> initial_steps,
                             const NelderMeadOptions& options = {});

}  // namespace psnspd
