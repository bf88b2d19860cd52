#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comove/config.hpp"
#include "comove/market_data.hpp"

namespace comove {

struct SyntheticScenario {
  std::uint64_t seed = 1;
  int stocks = 20;
  int days = 243;
  int intervals_per_day = 48;
  int leaders = 1;                // the first `leaders` stocks lead every other stock
  double leader_coefficient = 0.6;  // follower on lagged leader excess return
  double own_ar = 0.0;
  double shock_sd = 0.001;
  double shock_correlation = 0.0;  // common pairwise correlation of excess-return shocks
  double benchmark_sd = 0.0008;
  double missing_rate = 0.0005;    // probability that a stock bar is dropped
  int excluded_stocks = 0;         // extra stocks with too many missing bars
  bool dividend = true;            // factor step on one stock mid-sample
  double mean_amount = 2.0e6;
  int noise_variables = 4;
  double linked_strength = 4.0;    // linked variable = strength * is_leader + N(0, 1)
  std::string start_date = "2021-01-04";
  std::string benchmark_code = "sh.000001";

  void set(const std::string& key, const std::string& value);
  void validate() const;
  std::string code(int i) const;
  std::vector<SessionWindow> sessions() const;
};

SyntheticScenario load_scenario(const std::filesystem::path& path);

struct SyntheticTruth {
  std::vector<std::string> leaders;
  std::vector<std::string> excluded;
  std::string linked_variable;
  Eigen::MatrixXd coefficients;  // planted A1 over the retained stocks
  Eigen::MatrixXd shock_covariance;
};

struct SyntheticData {
  BarPanel bars;
  FundamentalsTable fundamentals;
  SyntheticTruth truth;
};

// Excess returns follow y_t = A y_{t-1} + e_t; stock prices compound
// benchmark plus excess returns from 100.
SyntheticData generate_panel(const SyntheticScenario& scenario);

// Writes calendar.csv, bars.csv, factors.csv, fundamentals.csv, truth.json.
void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data);

// Monte Carlo FEVD: forecast errors are built by running the VAR recursion on
// simulated shock paths, then attributed per orthogonal shock. Each shock's
// H-vector of draws is whitened across paths, which removes sampling noise in
// its second moments. Returns shares[h-1](j, i) for h = 1..horizon.
std::vector<Eigen::MatrixXd> fevd_oracle(std::span<const Eigen::MatrixXd> coefficients,
                                         const Eigen::MatrixXd& sigma, int horizon,
                                         std::span<const int> ordering, std::size_t paths = 1000000,
                                         std::uint64_t seed = 1);

struct RecoveryReport {
  std::vector<std::string> leaders;
  std::string linked_variable;
  std::map<std::string, bool> leader_top;   // per model: every leader ranks first
  std::map<std::string, int> leader_rank;   // per model: worst leader rank (1 = top)
  bool linked_validated = false;
  std::vector<std::string> linked_models;
  std::vector<std::string> validated_variables;
};

RecoveryReport recovery_experiment(const SyntheticScenario& scenario, const RunConfig& config = {});

}  // namespace comove
