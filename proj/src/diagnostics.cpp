#include "comove/diagnostics.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "comove/error.hpp"
#include "comove/ols.hpp"

namespace comove {

double durbin_watson(std::span<const double> e) {
  if (e.size() < 2) throw InputError("durbin_watson: need at least two residuals");
  double num = 0, den = e[0] * e[0];
  for (std::size_t t = 1; t < e.size(); ++t) {
    const double d = e[t] - e[t - 1];
    num += d * d;
    den += e[t] * e[t];
  }
  if (den == 0) throw NumericalError("durbin_watson: residuals are all zero");
  return num / den;
}

JarqueBera jarque_bera(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 8) throw InputError("jarque_bera: need at least 8 observations");
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (m2 == 0) throw NumericalError("jarque_bera: zero variance");
  JarqueBera r;
  r.skewness = m3 / std::pow(m2, 1.5);
  r.kurtosis = m4 / (m2 * m2);
  const double ek = r.kurtosis - 3.0;
  r.statistic = static_cast<double>(n) / 6.0 * (r.skewness * r.skewness + ek * ek / 4.0);
  r.p_value = std::exp(-r.statistic / 2.0);  // chi-square(2) survival function
  return r;
}

double adf_critical_value(int level, int observations) {
  // tau_c, one series: b0 + b1/T + b2/T^2 + b3/T^3
  static constexpr double kCoef[3][4] = {
      {-3.43035, -6.5393, -16.786, -79.433},
      {-2.86154, -2.8903, -4.234, -40.040},
      {-2.56677, -1.5384, -2.809, 0.0},
  };
  const int row = level == 1 ? 0 : level == 5 ? 1 : level == 10 ? 2 : -1;
  if (row < 0) throw InputError("adf_critical_value: level must be 1, 5 or 10");
  const double inv = 1.0 / observations;
  const auto& c = kCoef[row];
  return c[0] + c[1] * inv + c[2] * inv * inv + c[3] * inv * inv * inv;
}

namespace {

// Rows t = start..n-2 of dy_t = a + g y_t + sum_i d_i dy_{t-i}, where
// dy_t = y_{t+1} - y_t.
void adf_design(std::span<const double> y, int lags, int start, Eigen::MatrixXd& X, Eigen::VectorXd& z) {
  const int n_diff = static_cast<int>(y.size()) - 1;
  const int rows = n_diff - start;
  X.resize(rows, 2 + lags);
  z.resize(rows);
  for (int r = 0; r < rows; ++r) {
    const int t = start + r;
    z(r) = y[static_cast<std::size_t>(t + 1)] - y[static_cast<std::size_t>(t)];
    X(r, 0) = 1.0;
    X(r, 1) = y[static_cast<std::size_t>(t)];
    for (int i = 1; i <= lags; ++i)
      X(r, 1 + i) = y[static_cast<std::size_t>(t - i + 1)] - y[static_cast<std::size_t>(t - i)];
  }
}

}  // namespace

AdfResult adf_test(std::span<const double> y, int max_lag) {
  if (y.size() <= 25) throw InputError("adf_test: need more than 25 observations");
  if (max_lag < 0) throw InputError("adf_test: max_lag must be >= 0");
  bool constant = true, constant_step = true;
  const double step = y[1] - y[0];
  for (std::size_t t = 1; t < y.size(); ++t) {
    if (y[t] != y[0]) constant = false;
    if (std::abs((y[t] - y[t - 1]) - step) > 1e-12 * (1.0 + std::abs(step))) constant_step = false;
  }
  if (constant) throw NumericalError("adf_test: constant series");
  if (constant_step) throw NumericalError("adf_test: deterministic ramp (differenced series is constant)");

  Eigen::MatrixXd X;
  Eigen::VectorXd z;
  int best_lag = 0;
  double best_bic = 0;
  bool have = false;
  for (int l = 0; l <= max_lag; ++l) {
    adf_design(y, l, max_lag, X, z);
    const double rss = ols_rss(X, z);
    if (std::isnan(rss) || rss <= 0) continue;
    const double m = static_cast<double>(X.rows());
    const double bic = std::log(rss / m) + static_cast<double>(X.cols()) * std::log(m) / m;
    if (!have || bic < best_bic) {
      have = true;
      best_bic = bic;
      best_lag = l;
    }
  }
  if (!have) throw NumericalError("adf_test: no feasible augmentation lag");

  adf_design(y, best_lag, best_lag, X, z);
  const auto fit = ols(X, z);
  AdfResult r;
  r.statistic = fit.t_stats(1);
  r.lags = best_lag;
  r.observations = static_cast<int>(X.rows());
  r.critical_1 = adf_critical_value(1, r.observations);
  r.critical_5 = adf_critical_value(5, r.observations);
  r.critical_10 = adf_critical_value(10, r.observations);
  r.reject_unit_root = r.statistic < r.critical_5;
  return r;
}

}  // namespace comove
