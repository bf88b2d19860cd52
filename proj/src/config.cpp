#include "comove/config.hpp"

#include <charconv>
#include <fstream>

#include "comove/csv.hpp"
#include "comove/digest.hpp"
#include "comove/error.hpp"
#include "comove/market_data.hpp"

namespace comove {

namespace {

double to_double(const std::string& key, const std::string& v) {
  double d = 0;
  if (!csv::parse_double(v, d)) throw InputError("config: '" + key + "' expects a number, got '" + v + "'");
  return d;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto t = csv::trim(v);
  auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw InputError("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

}  // namespace

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = csv::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    out[std::string(csv::trim(t.substr(0, eq)))] = std::string(csv::trim(t.substr(eq + 1)));
  }
  return out;
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> k;
  for (const auto& [key, value] : RunConfig{}.all_entries()) k.push_back(key);
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "input_dir") input_dir = value;
  else if (key == "bars") bars = value;
  else if (key == "factors") factors = value;
  else if (key == "calendar") calendar = value;
  else if (key == "fundamentals") fundamentals = value;
  else if (key == "out_dir") out_dir = value;
  else if (key == "benchmark_code") benchmark_code = value;
  else if (key == "sessions") sessions = value;
  else if (key == "missing_bar_threshold") missing_bar_threshold = to_int<std::size_t>(key, value);
  else if (key == "fundamentals_missing_threshold") fundamentals_missing_threshold = to_double(key, value);
  else if (key == "log_mean_threshold") log_mean_threshold = to_double(key, value);
  else if (key == "one_hot_support_numerator") one_hot_support_numerator = to_double(key, value);
  else if (key == "size_variable") size_variable = value;
  else if (key == "fevd_horizon") fevd_horizon = to_int<int>(key, value);
  else if (key == "var_p_max") var_p_max = to_int<int>(key, value);
  else if (key == "cholesky_ordering") cholesky_ordering = value;
  else if (key == "granger_lag_max") granger_lag_max = to_int<int>(key, value);
  else if (key == "granger_alpha") granger_alpha = to_double(key, value);
  else if (key == "condition_ceiling") condition_ceiling = to_double(key, value);
  else if (key == "p_screen") p_screen = to_double(key, value);
  else if (key == "validation_p") validation_p = to_double(key, value);
  else if (key == "validation_min_models") validation_min_models = to_int<int>(key, value);
  else if (key == "seed") seed = to_int<std::uint64_t>(key, value);
  else if (key == "workers") workers = to_int<int>(key, value);
  else if (key == "report_format") report_format = value;
  else throw InputError("config: unknown key '" + key + "'");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw InputError("config: " + what); };
  if (benchmark_code.empty()) fail("benchmark_code is empty");
  TradingCalendar({}, TradingCalendar::parse_sessions(sessions));
  if (!(fundamentals_missing_threshold >= 0 && fundamentals_missing_threshold <= 1))
    fail("fundamentals_missing_threshold must be in [0, 1]");
  if (!(log_mean_threshold > 0)) fail("log_mean_threshold must be positive");
  if (!(one_hot_support_numerator >= 0)) fail("one_hot_support_numerator must be non-negative");
  if (fevd_horizon < 1) fail("fevd_horizon must be >= 1");
  if (var_p_max < 1) fail("var_p_max must be >= 1");
  if (cholesky_ordering != "target_first" && cholesky_ordering != "peer_first")
    fail("cholesky_ordering must be target_first or peer_first");
  if (granger_lag_max < 1) fail("granger_lag_max must be >= 1");
  if (!(granger_alpha >= 0 && granger_alpha <= 1)) fail("granger_alpha must be in [0, 1]");
  if (!(condition_ceiling > 1)) fail("condition_ceiling must exceed 1");
  if (!(p_screen > 0 && p_screen <= 1)) fail("p_screen must be in (0, 1]");
  if (!(validation_p > 0 && validation_p <= 1)) fail("validation_p must be in (0, 1]");
  if (validation_min_models < 1 || validation_min_models > 4) fail("validation_min_models must be in [1, 4]");
  if (workers < 1) fail("workers must be >= 1");
  if (report_format != "csv" && report_format != "json") fail("report_format must be csv or json");
}

std::filesystem::path RunConfig::input(const std::filesystem::path& p) const {
  return p.is_absolute() || input_dir.empty() ? p : input_dir / p;
}

std::vector<std::pair<std::string, std::string>> RunConfig::parameters() const {
  return {
      {"benchmark_code", benchmark_code},
      {"cholesky_ordering", cholesky_ordering},
      {"condition_ceiling", csv::format_double(condition_ceiling)},
      {"fevd_horizon", std::to_string(fevd_horizon)},
      {"fundamentals_missing_threshold", csv::format_double(fundamentals_missing_threshold)},
      {"granger_alpha", csv::format_double(granger_alpha)},
      {"granger_lag_max", std::to_string(granger_lag_max)},
      {"log_mean_threshold", csv::format_double(log_mean_threshold)},
      {"missing_bar_threshold", std::to_string(missing_bar_threshold)},
      {"one_hot_support_numerator", csv::format_double(one_hot_support_numerator)},
      {"p_screen", csv::format_double(p_screen)},
      {"report_format", report_format},
      {"seed", std::to_string(seed)},
      {"sessions", sessions},
      {"size_variable", size_variable},
      {"validation_min_models", std::to_string(validation_min_models)},
      {"validation_p", csv::format_double(validation_p)},
      {"var_p_max", std::to_string(var_p_max)},
  };
}

std::vector<std::pair<std::string, std::string>> RunConfig::all_entries() const {
  auto out = parameters();
  out.insert(out.end(), {{"input_dir", input_dir.string()},
                         {"bars", bars.string()},
                         {"factors", factors.string()},
                         {"calendar", calendar.string()},
                         {"fundamentals", fundamentals.string()},
                         {"out_dir", out_dir.string()},
                         {"workers", std::to_string(workers)}});
  return out;
}

std::string RunConfig::digest() const {
  std::string text;
  for (const auto& [k, v] : parameters()) text += k + "=" + v + "\n";
  return sha256_hex(text);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg;
  for (const auto& [k, v] : read_key_values(path)) cfg.set(k, v);
  if (cfg.input_dir.empty()) cfg.input_dir = path.parent_path();
  else if (cfg.input_dir.is_relative()) cfg.input_dir = path.parent_path() / cfg.input_dir;
  return cfg;
}

}  // namespace comove
