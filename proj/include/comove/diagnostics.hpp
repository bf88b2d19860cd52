#pragma once

#include <span>

namespace comove {

// sum (e_t - e_{t-1})^2 / sum e_t^2, in [0, 4].
double durbin_watson(std::span<const double> residuals);

struct JarqueBera {
  double statistic = 0;
  double p_value = 1;  // chi-square(2) upper tail
  double skewness = 0;
  double kurtosis = 3;
};

JarqueBera jarque_bera(std::span<const double> sample);

struct AdfResult {
  double statistic = 0;  // t-ratio on the lagged level
  int lags = 0;          // augmentation lags chosen by BIC
  int observations = 0;
  double critical_1 = 0;
  double critical_5 = 0;
  double critical_10 = 0;
  bool reject_unit_root = false;  // statistic < 5% critical value
};

// Intercept-only ADF regression. Constant and deterministic-ramp inputs raise
// NumericalError.
AdfResult adf_test(std::span<const double> series, int max_lag);

// MacKinnon (2010) finite-sample critical value, constant-only case.
// level is 1, 5 or 10 (percent).
double adf_critical_value(int level, int observations);

}  // namespace comove
