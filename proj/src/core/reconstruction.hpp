#pragma once

#include <optional>
#include <vector>

#include "core/detector_model.hpp"
#include "core/photon_sources.hpp"

namespace psnspd {

//! Condition numbers above this are flagged, not rejected.
inline constexpr double kConditionWarningThreshold = 1e6;

struct ReconstructionResult {
  std::vector<double> raw;  // may contain negative entries
  PhotonStatistics clipped;  // negatives zeroed, renormalized
  double condition_number = 0.0;  // 1-norm condition of the square truncation
  bool truncation_note = false;  // discarded columns m > N carried probability
  bool ill_conditioned = false;  // condition_number > kConditionWarningThreshold
};

/// Solves the square system formed by columns m = 0..N of P for S.
/// Throws SingularMatrix when the truncation is rank deficient.
ReconstructionResult reconstruct_statistics(const ProbabilityMatrix& p,
                                            const ClickStatistics& q);

struct ReconstructionRow {
  std::size_t m = 0;
  std::optional<double> s_true;
  double s_raw = 0.0;
  double s_clipped = 0.0;
};

//! Plot-ready table; truth (if given) is read for m <= N.
std::vector<ReconstructionRow> reconstruction_table(
    const ReconstructionResult& result, const std::optional<PhotonStatistics>& truth);

}  // namespace psnspd
