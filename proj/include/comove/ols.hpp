#pragma once

#include <Eigen/Dense>

namespace comove {

struct OlsResult {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_stats;
  Eigen::VectorXd p_values;  // two-sided t-test
  Eigen::VectorXd residuals;
  double rss = 0;
  double sigma2 = 0;  // rss / dof
  int dof = 0;
  double r_squared = 0;  // centered; meaningful when the design has an intercept
};

// Least squares by column-pivoted QR. The design must have more rows than
// columns and full numerical rank; otherwise NumericalError.
OlsResult ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

// Residual sum of squares only, for inner loops. Returns NaN on rank deficiency.
double ols_rss(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

}  // namespace comove
