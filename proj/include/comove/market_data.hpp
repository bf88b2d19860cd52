#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "comove/fundamentals.hpp"

namespace comove {

// A continuous trading window, in minutes after midnight, e.g. 09:30-11:30.
struct SessionWindow {
  int start_minute = 0;
  int end_minute = 0;
};

// Ordered trading dates plus the intraday 5-minute grid. Bars are labelled by
// their end time, so the first slot of a 09:30 session is stamped 09:35.
class TradingCalendar {
 public:
  static constexpr int kBarMinutes = 5;

  TradingCalendar() = default;
  explicit TradingCalendar(std::vector<std::string> dates,
                           std::vector<SessionWindow> sessions = default_sessions());

  static std::vector<SessionWindow> default_sessions();
  // "09:30-11:30,13:00-15:00"
  static std::vector<SessionWindow> parse_sessions(std::string_view text);
  static std::string format_sessions(const std::vector<SessionWindow>& sessions);

  const std::vector<std::string>& dates() const { return dates_; }
  const std::vector<SessionWindow>& sessions() const { return sessions_; }
  std::size_t day_count() const { return dates_.size(); }
  int intervals_per_day() const { return intervals_per_day_; }
  std::size_t slot_count() const { return dates_.size() * static_cast<std::size_t>(intervals_per_day_); }

  std::optional<std::size_t> day_index(std::string_view date) const;
  std::optional<int> interval_index(int minute_of_day) const;
  int interval_end_minute(int interval) const;

  std::size_t slot(std::size_t day, int interval) const {
    return day * static_cast<std::size_t>(intervals_per_day_) + static_cast<std::size_t>(interval);
  }
  // "YYYY-MM-DD HH:MM" of a global slot.
  std::string timestamp(std::size_t slot) const;
  // Resolves a timestamp to a global slot; nullopt when it is not on the grid.
  std::optional<std::size_t> slot_of(std::string_view timestamp) const;

  bool operator==(const TradingCalendar& other) const;

 private:
  std::vector<std::string> dates_;
  std::vector<SessionWindow> sessions_;
  int intervals_per_day_ = 0;
};

struct Bar {
  double open = 0;
  double high = 0;
  double low = 0;
  double close = 0;
  double volume = 0;
  double amount = 0;
};

// One stock (or the benchmark) on the calendar grid; empty slots are missing.
struct BarSeries {
  std::string code;
  std::vector<std::optional<Bar>> slots;
};

std::size_t missing_count(const BarSeries& series);
std::size_t present_count(const BarSeries& series);

// code -> per-day cumulative post-adjustment factor (nullopt where not supplied).
using AdjustmentFactorSeries = std::map<std::string, std::vector<std::optional<double>>>;

struct BarPanel {
  TradingCalendar calendar;
  std::map<std::string, BarSeries> stocks;
  BarSeries benchmark;
  AdjustmentFactorSeries factors;
};

TradingCalendar load_calendar(const std::filesystem::path& path,
                              std::vector<SessionWindow> sessions = TradingCalendar::default_sessions());
void write_calendar(const std::filesystem::path& path, const TradingCalendar& calendar);

// Rows: code,timestamp,open,high,low,close,volume,amount. Errors carry line numbers.
std::map<std::string, BarSeries> load_bars(const std::filesystem::path& path,
                                           const TradingCalendar& calendar);
// Writes every present bar, codes sorted, prices at 6 decimals, volume/amount at 2.
void write_bars(const std::filesystem::path& path, const TradingCalendar& calendar,
                const std::map<std::string, BarSeries>& series);

AdjustmentFactorSeries load_factors(const std::filesystem::path& path,
                                    const TradingCalendar& calendar);
void write_factors(const std::filesystem::path& path, const TradingCalendar& calendar,
                   const AdjustmentFactorSeries& factors);

// Splits the benchmark out of the loaded series and checks it is complete.
BarPanel make_panel(TradingCalendar calendar, std::map<std::string, BarSeries> series,
                    AdjustmentFactorSeries factors, const std::string& benchmark_code);

// Header: code,<variables...>. When known_codes is non-empty, rows for other
// codes are rejected.
FundamentalsTable load_fundamentals(const std::filesystem::path& path,
                                    const std::set<std::string>& known_codes = {});
void write_fundamentals(const std::filesystem::path& path, const FundamentalsTable& table);

}  // namespace comove
