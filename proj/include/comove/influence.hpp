#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "comove/diagnostics.hpp"
#include "comove/returns.hpp"
#include "comove/var.hpp"

namespace comove {

struct FevdConfig {
  int horizon = 12;
  int p_max = 12;
  bool target_first = true;  // Cholesky ordering (target, peer); false = (peer, target)
  int adf_max_lag = 12;
};

// Bivariate (target excess return, peer aggregate) VAR summary for one stock.
struct InfluenceReport {
  std::string code;
  int lag_order = 0;
  std::vector<double> bic;  // per candidate lag
  bool stable = false;
  std::vector<double> eigenvalue_moduli;
  std::array<double, 2> durbin_watson{};
  std::array<JarqueBera, 2> jarque_bera{};
  std::array<AdfResult, 2> adf{};
  bool adf_available = false;
  std::vector<std::string> ordering;  // variable names in Cholesky order
  // Per horizon h = 1..H: target own share, peer share of target,
  // target share of peer, peer own share.
  std::vector<std::array<double, 4>> shares;
  double mean_amount = 0;
  double sum_fevd = 0;
  double influence_per_unit_trade = 0;
};

// Sum over h = 1..H of the target-shock share of the peer aggregate's
// forecast error variance, and that sum divided by ln(mean interval amount).
// Unstable fits are returned flagged; callers exclude them from regressions.
InfluenceReport fevd_influence(const ReturnPanel& panel, std::string_view target, const FevdConfig& config = {});

}  // namespace comove
