#include "comove/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "comove/csv.hpp"
#include "comove/error.hpp"

namespace comove {

namespace {

bool parse_int(std::string_view text, int& out) {
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

bool valid_date(std::string_view d) {
  if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
  int y = 0, m = 0, day = 0;
  if (!parse_int(d.substr(0, 4), y) || !parse_int(d.substr(5, 2), m) || !parse_int(d.substr(8, 2), day))
    return false;
  if (m < 1 || m > 12 || day < 1) return false;
  static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (day > kDays[m - 1]) return false;
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  return !(m == 2 && day == 29 && !leap);
}

// "HH:MM" or "HH:MM:SS" -> minutes after midnight.
std::optional<int> parse_clock(std::string_view t) {
  if (t.size() != 5 && t.size() != 8) return std::nullopt;
  int h = 0, m = 0;
  if (t[2] != ':' || !parse_int(t.substr(0, 2), h) || !parse_int(t.substr(3, 2), m)) return std::nullopt;
  if (t.size() == 8) {
    int s = 0;
    if (t[5] != ':' || !parse_int(t.substr(6, 2), s) || s != 0) return std::nullopt;
  }
  if (h > 23 || m > 59) return std::nullopt;
  return h * 60 + m;
}

std::string clock_text(int minute) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minute / 60, minute % 60);
  return buf;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

double field_number(const csv::Row& row, std::size_t col, const std::filesystem::path& path,
                    const char* what) {
  double v = 0;
  if (!csv::parse_double(row.fields[col], v) || !std::isfinite(v))
    throw InputError(where(path, row.line) + "malformed " + what + " '" + row.fields[col] + "'");
  return v;
}

}  // namespace

TradingCalendar::TradingCalendar(std::vector<std::string> dates, std::vector<SessionWindow> sessions)
    : dates_(std::move(dates)), sessions_(std::move(sessions)) {
  for (std::size_t i = 0; i < dates_.size(); ++i) {
    if (!valid_date(dates_[i])) throw InputError("calendar: invalid date '" + dates_[i] + "'");
    if (i > 0 && !(dates_[i - 1] < dates_[i]))
      throw InputError("calendar: dates not strictly increasing at '" + dates_[i] + "'");
  }
  int last_end = -1;
  for (const auto& s : sessions_) {
    const int len = s.end_minute - s.start_minute;
    if (len <= 0 || len % kBarMinutes != 0 || s.start_minute < last_end)
      throw InputError("calendar: invalid session window " + format_sessions({s}));
    intervals_per_day_ += len / kBarMinutes;
    last_end = s.end_minute;
  }
  if (intervals_per_day_ == 0) throw InputError("calendar: no trading sessions");
}

std::vector<SessionWindow> TradingCalendar::default_sessions() {
  return {{9 * 60 + 30, 11 * 60 + 30}, {13 * 60, 15 * 60}};
}

std::vector<SessionWindow> TradingCalendar::parse_sessions(std::string_view text) {
  std::vector<SessionWindow> out;
  for (const auto& part : csv::split_record(text)) {
    const auto piece = csv::trim(part);
    const auto dash = piece.find('-');
    if (dash == std::string_view::npos) throw InputError("invalid session '" + std::string(piece) + "'");
    auto a = parse_clock(csv::trim(piece.substr(0, dash)));
    auto b = parse_clock(csv::trim(piece.substr(dash + 1)));
    if (!a || !b || *a >= *b || (!out.empty() && *a < out.back().end_minute))
      throw InputError("invalid session '" + std::string(piece) + "'");
    out.push_back({*a, *b});
  }
  return out;
}

std::string TradingCalendar::format_sessions(const std::vector<SessionWindow>& sessions) {
  std::string out;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    if (i) out += ',';
    out += clock_text(sessions[i].start_minute) + "-" + clock_text(sessions[i].end_minute);
  }
  return out;
}

std::optional<std::size_t> TradingCalendar::day_index(std::string_view date) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), date,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == dates_.end() || *it != date) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

std::optional<int> TradingCalendar::interval_index(int minute_of_day) const {
  int base = 0;
  for (const auto& s : sessions_) {
    const int offset = minute_of_day - s.start_minute;
    const int n = (s.end_minute - s.start_minute) / kBarMinutes;
    if (offset > 0 && offset <= n * kBarMinutes) {
      if (offset % kBarMinutes != 0) return std::nullopt;
      return base + offset / kBarMinutes - 1;
    }
    base += n;
  }
  return std::nullopt;
}

int TradingCalendar::interval_end_minute(int interval) const {
  int base = 0;
  for (const auto& s : sessions_) {
    const int n = (s.end_minute - s.start_minute) / kBarMinutes;
    if (interval < base + n) return s.start_minute + (interval - base + 1) * kBarMinutes;
    base += n;
  }
  throw std::out_of_range("interval index out of range");
}

std::string TradingCalendar::timestamp(std::size_t slot) const {
  const auto ipd = static_cast<std::size_t>(intervals_per_day_);
  return dates_.at(slot / ipd) + " " + clock_text(interval_end_minute(static_cast<int>(slot % ipd)));
}

std::optional<std::size_t> TradingCalendar::slot_of(std::string_view ts) const {
  ts = csv::trim(ts);
  if (ts.size() < 16 || (ts[10] != ' ' && ts[10] != 'T')) return std::nullopt;
  auto day = day_index(ts.substr(0, 10));
  auto minute = parse_clock(ts.substr(11));
  if (!day || !minute) return std::nullopt;
  auto interval = interval_index(*minute);
  if (!interval) return std::nullopt;
  return slot(*day, *interval);
}

bool TradingCalendar::operator==(const TradingCalendar& o) const {
  if (dates_ != o.dates_ || sessions_.size() != o.sessions_.size()) return false;
  for (std::size_t i = 0; i < sessions_.size(); ++i) {
    if (sessions_[i].start_minute != o.sessions_[i].start_minute ||
        sessions_[i].end_minute != o.sessions_[i].end_minute)
      return false;
  }
  return true;
}

std::size_t missing_count(const BarSeries& series) {
  return static_cast<std::size_t>(
      std::count_if(series.slots.begin(), series.slots.end(), [](const auto& b) { return !b; }));
}

std::size_t present_count(const BarSeries& series) { return series.slots.size() - missing_count(series); }

TradingCalendar load_calendar(const std::filesystem::path& path, std::vector<SessionWindow> sessions) {
  const auto table = csv::read(path);
  const auto col = table.column("date");
  std::vector<std::string> dates;
  dates.reserve(table.rows.size());
  for (const auto& row : table.rows) dates.emplace_back(csv::trim(row.fields[col]));
  try {
    return TradingCalendar(std::move(dates), std::move(sessions));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_calendar(const std::filesystem::path& path, const TradingCalendar& calendar) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "date\n";
  for (const auto& d : calendar.dates()) out << d << '\n';
}

std::map<std::string, BarSeries> load_bars(const std::filesystem::path& path, const TradingCalendar& calendar) {
  const auto table = csv::read(path);
  const std::size_t c_code = table.column("code"), c_ts = table.column("timestamp"),
                    c_open = table.column("open"), c_high = table.column("high"),
                    c_low = table.column("low"), c_close = table.column("close"),
                    c_vol = table.column("volume"), c_amt = table.column("amount");
  std::map<std::string, BarSeries> out;
  for (const auto& row : table.rows) {
    const std::string code(csv::trim(row.fields[c_code]));
    if (code.empty()) throw InputError(where(path, row.line) + "empty stock code");
    const auto slot = calendar.slot_of(row.fields[c_ts]);
    if (!slot)
      throw InputError(where(path, row.line) + "timestamp outside calendar '" + row.fields[c_ts] + "'");
    Bar bar;
    bar.open = field_number(row, c_open, path, "open");
    bar.high = field_number(row, c_high, path, "high");
    bar.low = field_number(row, c_low, path, "low");
    bar.close = field_number(row, c_close, path, "close");
    bar.volume = field_number(row, c_vol, path, "volume");
    bar.amount = field_number(row, c_amt, path, "amount");
    if (bar.close <= 0) throw InputError(where(path, row.line) + "non-positive close");
    if (bar.volume < 0 || bar.amount < 0) throw InputError(where(path, row.line) + "negative volume or amount");
    auto& series = out[code];
    if (series.slots.empty()) {
      series.code = code;
      series.slots.resize(calendar.slot_count());
    }
    if (series.slots[*slot])
      throw InputError(where(path, row.line) + "duplicate slot for " + code + " at " + row.fields[c_ts]);
    series.slots[*slot] = bar;
  }
  return out;
}

void write_bars(const std::filesystem::path& path, const TradingCalendar& calendar,
                const std::map<std::string, BarSeries>& series) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "code,timestamp,open,high,low,close,volume,amount\n";
  for (const auto& [code, s] : series) {
    for (std::size_t t = 0; t < s.slots.size(); ++t) {
      if (!s.slots[t]) continue;
      const Bar& b = *s.slots[t];
      out << csv::quote(code) << ',' << calendar.timestamp(t) << ',' << csv::format_fixed(b.open, 6) << ','
          << csv::format_fixed(b.high, 6) << ',' << csv::format_fixed(b.low, 6) << ','
          << csv::format_fixed(b.close, 6) << ',' << csv::format_fixed(b.volume, 2) << ','
          << csv::format_fixed(b.amount, 2) << '\n';
    }
  }
}

AdjustmentFactorSeries load_factors(const std::filesystem::path& path, const TradingCalendar& calendar) {
  const auto table = csv::read(path);
  const std::size_t c_code = table.column("code"), c_date = table.column("date"), c_f = table.column("factor");
  AdjustmentFactorSeries out;
  for (const auto& row : table.rows) {
    const std::string code(csv::trim(row.fields[c_code]));
    const auto day = calendar.day_index(csv::trim(row.fields[c_date]));
    if (!day) throw InputError(where(path, row.line) + "date outside calendar '" + row.fields[c_date] + "'");
    const double f = field_number(row, c_f, path, "factor");
    if (f <= 0) throw InputError(where(path, row.line) + "factor must be strictly positive");
    auto& v = out[code];
    if (v.empty()) v.resize(calendar.day_count());
    if (v[*day]) throw InputError(where(path, row.line) + "duplicate factor for " + code);
    v[*day] = f;
  }
  for (const auto& [code, v] : out) {
    std::optional<double> prev;
    for (std::size_t d = 0; d < v.size(); ++d) {
      if (!v[d]) continue;
      if (prev && *v[d] < *prev)
        throw InputError(path.string() + ": factor for " + code + " decreases on " + calendar.dates()[d]);
      prev = v[d];
    }
  }
  return out;
}

void write_factors(const std::filesystem::path& path, const TradingCalendar& calendar,
                   const AdjustmentFactorSeries& factors) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "code,date,factor\n";
  for (const auto& [code, v] : factors) {
    for (std::size_t d = 0; d < v.size(); ++d) {
      if (v[d]) out << csv::quote(code) << ',' << calendar.dates()[d] << ',' << csv::format_double(*v[d]) << '\n';
    }
  }
}

BarPanel make_panel(TradingCalendar calendar, std::map<std::string, BarSeries> series,
                    AdjustmentFactorSeries factors, const std::string& benchmark_code) {
  BarPanel panel;
  auto it = series.find(benchmark_code);
  if (it == series.end()) throw InputError("benchmark series '" + benchmark_code + "' not found in bars");
  panel.benchmark = std::move(it->second);
  series.erase(it);
  if (const auto m = missing_count(panel.benchmark); m > 0)
    throw InputError("benchmark '" + benchmark_code + "' is missing " + std::to_string(m) + " slots");
  if (series.empty()) throw InputError("stock universe is empty");
  for (auto& [code, s] : series) {
    if (s.slots.size() != calendar.slot_count()) throw InputError("series " + code + " is off the calendar grid");
  }
  panel.calendar = std::move(calendar);
  panel.stocks = std::move(series);
  panel.factors = std::move(factors);
  return panel;
}

FundamentalsTable load_fundamentals(const std::filesystem::path& path, const std::set<std::string>& known_codes) {
  const auto table = csv::read(path);
  const std::size_t c_code = table.column("code");
  FundamentalsTable out;
  std::vector<std::vector<std::string>> raw(table.header.size());
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    std::string code(csv::trim(row.fields[c_code]));
    if (!known_codes.empty() && !known_codes.count(code))
      throw InputError(where(path, row.line) + "unknown stock code '" + code + "'");
    if (!seen.insert(code).second) throw InputError(where(path, row.line) + "duplicate stock code '" + code + "'");
    out.codes.push_back(std::move(code));
    for (std::size_t c = 0; c < row.fields.size(); ++c) raw[c].emplace_back(csv::trim(row.fields[c]));
  }
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == c_code) continue;
    out.variables.push_back(classify_column(table.header[c], raw[c]));
  }
  return out;
}

void write_fundamentals(const std::filesystem::path& path, const FundamentalsTable& table) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  std::vector<std::string> header{"code"};
  for (const auto& v : table.variables) header.push_back(v.name);
  csv::write_record(out, header);
  for (std::size_t i = 0; i < table.codes.size(); ++i) {
    std::vector<std::string> row{table.codes[i]};
    for (const auto& v : table.variables) {
      const Cell& c = v.cells[i];
      if (is_missing(c)) row.emplace_back();
      else if (auto d = std::get_if<double>(&c)) row.push_back(csv::format_double(*d));
      else if (auto b = std::get_if<bool>(&c)) row.push_back(*b ? "yes" : "no");
      else row.push_back(std::get<std::string>(c));
    }
    csv::write_record(out, row);
  }
}

}  // namespace comove
