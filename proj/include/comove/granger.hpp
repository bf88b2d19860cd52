#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "comove/returns.hpp"

namespace comove {

struct GrangerResult {
  bool tested = false;
  std::string skip_reason;  // set when !tested
  int lag = 0;              // SIC-selected lag
  double f_statistic = 0;
  double p_value = 1;
  std::vector<double> sic;  // per candidate lag on the common sample (NaN = infeasible)
};

// Pairwise test that `cause` Granger-causes `effect`. The lag minimizing SIC
// of the unrestricted model is chosen on the common sample (first lag_max rows
// dropped); the F-test of the cause-lag block is then run at that lag on its
// full available sample. Constant inputs are skipped with a reason.
GrangerResult granger_test(std::span<const double> effect, std::span<const double> cause, int lag_max = 10);

struct GrangerDayOutcome {
  std::string date;
  std::vector<std::string> codes;
  // Row-major n x n, index [cause * n + effect]; diagonal unused.
  std::vector<double> p_values;
  std::vector<int> lags;
  std::vector<char> tested;
  std::vector<char> significant;
  std::vector<std::string> skipped;  // "cause->effect: reason"

  std::size_t n() const { return codes.size(); }
  std::size_t at(std::size_t cause, std::size_t effect) const { return cause * codes.size() + effect; }
  // Significant edges with the stock as cause.
  std::vector<int> cause_counts() const;
};

GrangerDayOutcome daily_matrix(const ReturnPanel& panel, std::size_t day, int lag_max = 10, double alpha = 0.01);

struct InfluenceTally {
  std::vector<std::string> codes;
  std::vector<int> top_influencer_days;  // significant001_bool
  std::vector<long> total_causal_impacts;
  std::vector<double> times_log;          // significant001_times_log

  std::size_t index_of(const std::string& code) const;
};

// Every stock attaining a day's maximum cause count (when > 0) scores that day.
InfluenceTally tally(std::span<const GrangerDayOutcome> outcomes);

void write_granger_daily(const std::filesystem::path& path, std::span<const GrangerDayOutcome> outcomes,
                         const std::string& config_digest = {});
void write_granger_tally(const std::filesystem::path& path, const InfluenceTally& t,
                         const std::string& config_digest = {});
InfluenceTally read_granger_tally(const std::filesystem::path& path);

}  // namespace comove
