#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace comove {

// Reduced-form VAR(p): y_t = A0 + A1 y_{t-1} + ... + Ap y_{t-p} + e_t.
struct VarFit {
  int lag_order = 0;
  Eigen::VectorXd intercept;                 // k
  std::vector<Eigen::MatrixXd> coefficients;  // p matrices, k x k
  Eigen::MatrixXd sigma;                      // residual covariance, divisor T - k p - 1
  Eigen::MatrixXd residuals;                  // T x k
  int sample_size = 0;                        // T, rows used in estimation
  double bic = 0;
  std::vector<double> eigenvalue_moduli;      // companion matrix, descending

  int dimension() const { return static_cast<int>(intercept.size()); }
};

// Builds a VarFit from known parameters (no data); used by simulations and
// oracles. Eigenvalue moduli are filled in.
VarFit var_from_parameters(Eigen::VectorXd intercept, std::vector<Eigen::MatrixXd> coefficients,
                           Eigen::MatrixXd sigma);

// Equation-by-equation OLS on `series` (T x k). Rows before `sample_start`
// serve only as lags; sample_start < p means "start at p".
VarFit fit_var(const Eigen::MatrixXd& series, int p, int sample_start = -1);

struct LagSelection {
  int lag_order = 1;
  std::vector<double> criteria;  // BIC for p = 1..p_max on the common sample
};

// argmin_p ln det(Sigma_ML) + ln(T*)/T* * k(kp + 1), all fits on rows p_max..T-1.
LagSelection select_lag_bic(const Eigen::MatrixXd& series, int p_max);

Eigen::MatrixXd companion_matrix(const VarFit& fit);
std::vector<double> companion_eigenvalue_moduli(const VarFit& fit);
bool is_stable(const VarFit& fit);

// Reduced-form responses Phi_0..Phi_h (Phi_0 = I).
std::vector<Eigen::MatrixXd> irf(const VarFit& fit, int h);

// Lower Cholesky factor of sigma under a variable ordering, mapped back to
// the original variable order: column ordering[m] carries the m-th shock.
Eigen::MatrixXd ordered_cholesky(const Eigen::MatrixXd& sigma, std::span<const int> ordering);

// Orthogonalized responses Theta_s = Phi_s * B for s = 0..h.
std::vector<Eigen::MatrixXd> orthogonal_irf(const VarFit& fit, int h, std::span<const int> ordering);

struct FevdResult {
  int horizon = 0;
  std::vector<int> ordering;
  bool stable = true;
  // shares[h-1](j, i): share of variable j's h-step forecast error variance
  // due to the shock of variable i, h = 1..horizon.
  std::vector<Eigen::MatrixXd> shares;

  double share(int h, int j, int i) const { return shares.at(static_cast<std::size_t>(h - 1))(j, i); }
};

// Orthogonalized FEVD. An unstable fit is computed anyway and flagged.
FevdResult fevd(const VarFit& fit, int horizon, std::span<const int> ordering);

std::vector<int> identity_ordering(int k);

}  // namespace comove
