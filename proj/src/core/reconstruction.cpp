#include "core/reconstruction.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "core/error.hpp"

namespace psnspd {

ReconstructionResult reconstruct_statistics(const ProbabilityMatrix& p,
                                            const ClickStatistics& q) {
  const std::size_t dim = p.n_pixels() + 1;
  if (q.probs().size() != dim)
    fail(ErrorCode::DimensionMismatch,
         "click statistics have " + std::to_string(q.probs().size()) +
             " bins but the matrix has " + std::to_string(dim) + " rows");
  if (p.cols() < dim)
    fail(ErrorCode::DimensionMismatch,
         "matrix truncated at " + std::to_string(p.max_photons()) +
             " photons cannot be squared to " + std::to_string(dim) + " columns");

  Eigen::MatrixXd a(dim, dim);
  Eigen::VectorXd b(dim);
  for (std::size_t n = 0; n < dim; ++n) {
    b(n) = q[n];
    for (std::size_t m = 0; m < dim; ++m) a(n, m) = p(n, m);
  }

  bool truncation_note = false;
  for (std::size_t n = 0; n < dim && !truncation_note; ++n)
    for (std::size_t m = dim; m < p.cols(); ++m)
      if (p(n, m) != 0.0) {
        truncation_note = true;
        break;
      }

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const auto& packed = lu.matrixLU();
  const double scale = a.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < packed.rows(); ++i)
    if (!(std::abs(packed(i, i)) > 1e-13 * scale))
      fail(ErrorCode::SingularMatrix,
           "truncated matrix is singular (some pixels never fire or too few columns)");

  const Eigen::VectorXd x = lu.solve(b);
  const Eigen::MatrixXd inverse = lu.inverse();
  const double condition = a.cwiseAbs().colwise().sum().maxCoeff() *
                           inverse.cwiseAbs().colwise().sum().maxCoeff();

  std::vector<double> raw(x.data(), x.data() + x.size());
  std::vector<double> clipped(dim);
  double sum = 0.0;
  for (std::size_t m = 0; m < dim; ++m) {
    clipped[m] = std::max(0.0, raw[m]);
    sum += clipped[m];
  }
  if (!(sum > 0.0))
    fail(ErrorCode::InvalidArgument, "reconstruction has no nonnegative probability mass");
  for (double& v : clipped) v /= sum;

  return {std::move(raw), PhotonStatistics(std::move(clipped)), condition, truncation_note,
          condition > kConditionWarningThreshold};
}

std::vector<ReconstructionRow> reconstruction_table(
    const ReconstructionResult& result, const std::optional<PhotonStatistics>& truth) {
  std::vector<ReconstructionRow> rows;
  for (std::size_t m = 0; m < result.raw.size(); ++m) {
    ReconstructionRow row{m, std::nullopt, result.raw[m], result.clipped[m]};
    if (truth) row.s_true = m < truth->probs().size() ? (*truth)[m] : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace psnspd
