#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace comove {

// Reads "key = value" lines; '#' starts a comment. Later keys override earlier.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

struct RunConfig {
  // Inputs, resolved against input_dir when relative.
  std::filesystem::path input_dir;
  std::filesystem::path bars = "bars.csv";
  std::filesystem::path factors = "factors.csv";
  std::filesystem::path calendar = "calendar.csv";
  std::filesystem::path fundamentals = "fundamentals.csv";
  std::filesystem::path out_dir = "out";

  std::string benchmark_code = "sh.000001";
  std::string sessions = "09:30-11:30,13:00-15:00";
  std::size_t missing_bar_threshold = 1000;
  double fundamentals_missing_threshold = 0.20;
  double log_mean_threshold = 100.0;
  double one_hot_support_numerator = 4.0;  // threshold = numerator / n
  std::string size_variable = "total_assets";
  int fevd_horizon = 12;
  int var_p_max = 12;
  std::string cholesky_ordering = "target_first";  // or "peer_first"
  int granger_lag_max = 10;
  double granger_alpha = 0.01;
  double condition_ceiling = 100.0;
  double p_screen = 0.5;
  double validation_p = 0.1;
  int validation_min_models = 2;
  std::uint64_t seed = 20210104;
  int workers = 1;
  std::string report_format = "csv";  // run summary: csv | json

  // Throws InputError on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  std::filesystem::path input(const std::filesystem::path& p) const;

  // Analysis parameters (no paths, no worker count), sorted by key.
  std::vector<std::pair<std::string, std::string>> parameters() const;
  std::vector<std::pair<std::string, std::string>> all_entries() const;
  std::string digest() const;

  static std::vector<std::string> keys();
};

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace comove
