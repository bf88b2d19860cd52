#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "comove/market_data.hpp"
#include "comove/returns.hpp"

namespace fixtures {

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("comove_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<std::string> dates(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    const int month = 1 + i / 28, day = 1 + i % 28;
    char buf[32];
    std::snprintf(buf, sizeof buf, "2021-%02d-%02d", month, day);
    out.emplace_back(buf);
  }
  return out;
}

// Return panel from explicit excess returns and amounts (stocks x slots).
inline comove::ReturnPanel panel(const comove::TradingCalendar& calendar, std::vector<std::string> codes,
                                 const Eigen::MatrixXd& excess, const Eigen::MatrixXd& amounts) {
  comove::ReturnPanel p;
  p.calendar = calendar;
  p.codes = std::move(codes);
  p.excess = excess;
  p.amounts = amounts;
  p.return_imputed = comove::Mask::Zero(excess.rows(), excess.cols());
  p.amount_imputed = comove::Mask::Zero(excess.rows(), excess.cols());
  return p;
}

}  // namespace fixtures
