#include "comove/ols.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "comove/distributions.hpp"
#include "comove/error.hpp"

namespace comove {

namespace {

constexpr double kRankTolerance = 1e-10;

}  // namespace

OlsResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::Index n = X.rows(), k = X.cols();
  if (y.size() != n) throw NumericalError("ols: response length does not match design rows");
  if (k == 0) throw NumericalError("ols: empty design");
  if (n <= k)
    throw NumericalError("ols: " + std::to_string(n) + " rows for " + std::to_string(k) + " columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < k)
    throw NumericalError("ols: rank-deficient design (rank " + std::to_string(qr.rank()) + " of " +
                         std::to_string(k) + " columns)");

  OlsResult r;
  r.coefficients = qr.solve(y);
  r.residuals = y - X * r.coefficients;
  r.rss = r.residuals.squaredNorm();
  r.dof = static_cast<int>(n - k);
  r.sigma2 = r.rss / r.dof;

  // (X'X)^-1 = P R^-1 R^-T P'
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd xtx_inv_permuted = Rinv * Rinv.transpose();
  const auto& perm = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = perm * xtx_inv_permuted * perm.transpose();

  r.std_errors = (r.sigma2 * xtx_inv.diagonal().array()).sqrt().matrix();
  r.t_stats.resize(k);
  r.p_values.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double se = r.std_errors(j);
    r.t_stats(j) = se > 0 ? r.coefficients(j) / se
                          : (r.coefficients(j) == 0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.coefficients(j)));
    r.p_values(j) = dist::student_t_two_sided(r.t_stats(j), r.dof);
  }
  const double tss = (y.array() - y.mean()).square().sum();
  r.r_squared = tss > 0 ? 1.0 - r.rss / tss : 0.0;
  return r;
}

double ols_rss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() <= X.cols()) return std::numeric_limits<double>::quiet_NaN();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < X.cols()) return std::numeric_limits<double>::quiet_NaN();
  return (y - X * qr.solve(y)).squaredNorm();
}

}  // namespace comove
