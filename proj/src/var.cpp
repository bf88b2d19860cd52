#include "comove/var.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "comove/error.hpp"

namespace comove {

namespace {

void check_ordering(std::span<const int> ordering, int k) {
  if (static_cast<int>(ordering.size()) != k) throw NumericalError("ordering has wrong length");
  std::vector<int> sorted(ordering.begin(), ordering.end());
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < k; ++i)
    if (sorted[static_cast<std::size_t>(i)] != i) throw NumericalError("ordering is not a permutation");
}

}  // namespace

std::vector<int> identity_ordering(int k) {
  std::vector<int> o(static_cast<std::size_t>(k));
  std::iota(o.begin(), o.end(), 0);
  return o;
}

VarFit var_from_parameters(Eigen::VectorXd intercept, std::vector<Eigen::MatrixXd> coefficients,
                           Eigen::MatrixXd sigma) {
  VarFit fit;
  fit.lag_order = static_cast<int>(coefficients.size());
  fit.intercept = std::move(intercept);
  fit.coefficients = std::move(coefficients);
  fit.sigma = std::move(sigma);
  fit.eigenvalue_moduli = companion_eigenvalue_moduli(fit);
  return fit;
}

VarFit fit_var(const Eigen::MatrixXd& series, int p, int sample_start) {
  const Eigen::Index T = series.rows();
  const int k = static_cast<int>(series.cols());
  if (p < 1) throw NumericalError("fit_var: lag order must be >= 1");
  if (k < 1) throw NumericalError("fit_var: no variables");
  const int start = std::max(sample_start, p);
  const Eigen::Index n = T - start;
  const int regressors = 1 + k * p;
  if (n <= k * p + 1)
    throw NumericalError("fit_var: insufficient observations (" + std::to_string(n) + " for lag " +
                         std::to_string(p) + ")");
  for (int j = 0; j < k; ++j) {
    const auto col = series.col(j);
    if ((col.array() == col(0)).all())
      throw NumericalError("fit_var: variable " + std::to_string(j) + " is constant");
  }

  Eigen::MatrixXd X(n, regressors);
  const Eigen::MatrixXd Y = series.bottomRows(n);
  X.col(0).setOnes();
  for (int l = 1; l <= p; ++l)
    X.middleCols(1 + (l - 1) * k, k) = series.middleRows(start - l, n);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < regressors) throw NumericalError("fit_var: lagged design is rank-deficient");
  const Eigen::MatrixXd B = qr.solve(Y);  // regressors x k

  VarFit fit;
  fit.lag_order = p;
  fit.intercept = B.row(0).transpose();
  for (int l = 0; l < p; ++l) fit.coefficients.push_back(B.middleRows(1 + l * k, k).transpose());
  fit.residuals = Y - X * B;
  fit.sample_size = static_cast<int>(n);
  const Eigen::MatrixXd cross = fit.residuals.transpose() * fit.residuals;
  fit.sigma = cross / static_cast<double>(n - k * p - 1);
  const Eigen::MatrixXd sigma_ml = cross / static_cast<double>(n);
  const double logdet = std::log(sigma_ml.determinant());
  fit.bic = logdet + std::log(static_cast<double>(n)) / static_cast<double>(n) * k * regressors;
  fit.eigenvalue_moduli = companion_eigenvalue_moduli(fit);
  return fit;
}

LagSelection select_lag_bic(const Eigen::MatrixXd& series, int p_max) {
  if (p_max < 1) throw NumericalError("select_lag_bic: p_max must be >= 1");
  LagSelection sel;
  double best = 0;
  for (int p = 1; p <= p_max; ++p) {
    const double bic = fit_var(series, p, p_max).bic;
    sel.criteria.push_back(bic);
    if (p == 1 || bic < best) {
      best = bic;
      sel.lag_order = p;
    }
  }
  return sel;
}

Eigen::MatrixXd companion_matrix(const VarFit& fit) {
  const int k = fit.dimension(), p = fit.lag_order;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(k * p, k * p);
  for (int l = 0; l < p; ++l) C.block(0, l * k, k, k) = fit.coefficients[static_cast<std::size_t>(l)];
  if (p > 1) C.block(k, 0, k * (p - 1), k * (p - 1)).setIdentity();
  return C;
}

std::vector<double> companion_eigenvalue_moduli(const VarFit& fit) {
  if (fit.lag_order == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion_matrix(fit), false);
  std::vector<double> moduli;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) moduli.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  return moduli;
}

bool is_stable(const VarFit& fit) {
  const auto moduli = fit.eigenvalue_moduli.empty() ? companion_eigenvalue_moduli(fit) : fit.eigenvalue_moduli;
  return moduli.empty() || moduli.front() < 1.0;
}

std::vector<Eigen::MatrixXd> irf(const VarFit& fit, int h) {
  const int k = fit.dimension(), p = fit.lag_order;
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(h + 1));
  if (p == 1) {
    // The literal power A1^h.
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(k, k);
    out.push_back(power);
    for (int s = 1; s <= h; ++s) {
      power = power * fit.coefficients[0];
      out.push_back(power);
    }
    return out;
  }
  const Eigen::MatrixXd C = companion_matrix(fit);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(k * p, k * p);
  out.push_back(power.topLeftCorner(k, k));
  for (int s = 1; s <= h; ++s) {
    power = power * C;
    out.push_back(power.topLeftCorner(k, k));
  }
  return out;
}

Eigen::MatrixXd ordered_cholesky(const Eigen::MatrixXd& sigma, std::span<const int> ordering) {
  const int k = static_cast<int>(sigma.rows());
  check_ordering(ordering, k);
  Eigen::MatrixXd permuted(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) permuted(a, b) = sigma(ordering[static_cast<std::size_t>(a)], ordering[static_cast<std::size_t>(b)]);
  Eigen::LLT<Eigen::MatrixXd> llt(permuted);
  if (llt.info() != Eigen::Success) throw NumericalError("Cholesky failure: residual covariance not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  for (int i = 0; i < k; ++i)
    if (!(L(i, i) > 0) || !std::isfinite(L(i, i)))
      throw NumericalError("Cholesky failure: residual covariance not positive definite");
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k, k);
  for (int a = 0; a < k; ++a)
    for (int m = 0; m < k; ++m) B(ordering[static_cast<std::size_t>(a)], ordering[static_cast<std::size_t>(m)]) = L(a, m);
  return B;
}

std::vector<Eigen::MatrixXd> orthogonal_irf(const VarFit& fit, int h, std::span<const int> ordering) {
  const Eigen::MatrixXd B = ordered_cholesky(fit.sigma, ordering);
  auto out = irf(fit, h);
  for (auto& m : out) m = m * B;
  return out;
}

FevdResult fevd(const VarFit& fit, int horizon, std::span<const int> ordering) {
  if (horizon < 1) throw NumericalError("fevd: horizon must be >= 1");
  const int k = fit.dimension();
  const auto theta = orthogonal_irf(fit, horizon - 1, ordering);
  FevdResult out;
  out.horizon = horizon;
  out.ordering.assign(ordering.begin(), ordering.end());
  out.stable = is_stable(fit);
  Eigen::MatrixXd accum = Eigen::MatrixXd::Zero(k, k);
  for (int h = 1; h <= horizon; ++h) {
    accum += theta[static_cast<std::size_t>(h - 1)].array().square().matrix();
    Eigen::MatrixXd s = accum;
    for (int j = 0; j < k; ++j) s.row(j) /= accum.row(j).sum();
    out.shares.push_back(std::move(s));
  }
  return out;
}

}  // namespace comove
