#include "comove/returns.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "comove/csv.hpp"
#include "comove/error.hpp"

namespace comove {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

}  // namespace

std::vector<double> adjusted_return_series(const BarSeries& bars, const std::vector<std::optional<double>>& factors,
                                           int intervals_per_day) {
  const std::size_t n = bars.slots.size();
  const auto ipd = static_cast<std::size_t>(intervals_per_day);
  auto adjusted = [&](std::size_t t) {
    const Bar& b = *bars.slots[t];
    if (b.close <= 0) throw InputError(bars.code + ": non-positive price at slot " + std::to_string(t));
    const std::size_t d = t / ipd;
    if (d >= factors.size() || !factors[d])
      throw InputError(bars.code + ": missing adjustment factor for day " + std::to_string(d));
    return b.close * *factors[d];
  };
  std::vector<double> out(n, kNaN);
  for (std::size_t t = 1; t < n; ++t) {
    if (!bars.slots[t] || !bars.slots[t - 1]) continue;
    out[t] = adjusted(t) / adjusted(t - 1) - 1.0;
  }
  return out;
}

std::vector<double> excess_returns(std::span<const double> stock, std::span<const double> benchmark) {
  if (stock.size() != benchmark.size())
    throw InputError("excess_returns: grid mismatch (" + std::to_string(stock.size()) + " vs " +
                     std::to_string(benchmark.size()) + " slots)");
  std::vector<double> out(stock.size());
  for (std::size_t t = 0; t < stock.size(); ++t) {
    if (std::isnan(benchmark[t])) throw InputError("excess_returns: benchmark missing at slot " + std::to_string(t));
    out[t] = stock[t] - benchmark[t];
  }
  return out;
}

std::optional<std::size_t> ReturnPanel::index_of(std::string_view code) const {
  for (std::size_t i = 0; i < codes.size(); ++i)
    if (codes[i] == code) return i;
  return std::nullopt;
}

ImputedReturns impute_returns(const RawReturnPanel& raw, std::size_t exclusion_threshold) {
  for (std::size_t i = 0; i < raw.codes.size(); ++i) {
    if (i < raw.missing_bars.size() && raw.missing_bars[i] > exclusion_threshold)
      throw InputError("impute_returns: " + raw.codes[i] + " has " + std::to_string(raw.missing_bars[i]) +
                       " missing slots; exclusion rule (> " + std::to_string(exclusion_threshold) +
                       ") must be applied first");
  }
  ImputedReturns out{raw.returns, Mask::Zero(raw.returns.rows(), raw.returns.cols())};
  for (Index i = 0; i < out.values.rows(); ++i) {
    for (Index t = 0; t < out.values.cols(); ++t) {
      if (std::isnan(out.values(i, t))) {
        out.values(i, t) = 0.0;
        out.mask(i, t) = 1;
      }
    }
  }
  return out;
}

ImputedAmounts impute_volume(const Eigen::MatrixXd& amounts, const TradingCalendar& calendar,
                             const std::vector<std::string>& codes) {
  const auto ipd = static_cast<std::size_t>(calendar.intervals_per_day());
  const std::size_t days = calendar.day_count();
  if (static_cast<std::size_t>(amounts.cols()) != days * ipd)
    throw InputError("impute_volume: amount matrix does not match the calendar");
  ImputedAmounts out{amounts, Mask::Zero(amounts.rows(), amounts.cols()), {}};

  // First-day fallback uses the cross-section of observed amounts per slot.
  std::vector<double> slot_median(ipd, 0.0);
  for (std::size_t k = 0; k < ipd; ++k) {
    std::vector<double> obs;
    for (Index i = 0; i < amounts.rows(); ++i)
      if (!std::isnan(amounts(i, idx(k)))) obs.push_back(amounts(i, idx(k)));
    if (obs.empty()) continue;
    std::sort(obs.begin(), obs.end());
    const std::size_t m = obs.size();
    slot_median[k] = m % 2 ? obs[m / 2] : 0.5 * (obs[m / 2 - 1] + obs[m / 2]);
  }

  for (Index i = 0; i < amounts.rows(); ++i) {
    const std::string& code = codes.at(static_cast<std::size_t>(i));
    for (std::size_t d = 0; d < days; ++d) {
      const std::size_t base = d * ipd;
      std::vector<std::size_t> gaps;
      for (std::size_t k = 0; k < ipd; ++k)
        if (std::isnan(out.values(i, idx(base + k)))) gaps.push_back(k);
      if (gaps.empty()) continue;

      auto fill = [&](std::size_t k, double v, const char* method) {
        out.values(i, idx(base + k)) = v;
        out.mask(i, idx(base + k)) = 1;
        out.audit.push_back({code, base + k, method});
      };

      if (d == 0) {
        for (auto k : gaps) fill(k, slot_median[k], "slot_median");
        continue;
      }
      const std::size_t prev = base - ipd;  // already complete
      double prev_total = 0;
      for (std::size_t k = 0; k < ipd; ++k) prev_total += out.values(i, idx(prev + k));
      double observed_sum = 0, observed_share = 0;
      if (prev_total > 0) {
        for (std::size_t k = 0; k < ipd; ++k) {
          const double a = out.values(i, idx(base + k));
          if (std::isnan(a)) continue;
          observed_sum += a;
          observed_share += out.values(i, idx(prev + k)) / prev_total;
        }
      }
      if (observed_share > 0) {
        const double day_total = observed_sum / observed_share;
        for (auto k : gaps) fill(k, day_total * out.values(i, idx(prev + k)) / prev_total, "ratio");
      } else {
        for (auto k : gaps) fill(k, out.values(i, idx(prev + k)), "previous_day");
      }
    }
  }
  return out;
}

std::vector<double> peer_weights(const ReturnPanel& panel, std::size_t target, std::size_t slot) {
  const std::size_t n = panel.stock_count();
  std::vector<double> w(n, 0.0);
  double total = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (j != target) total += panel.amounts(idx(j), idx(slot));
  for (std::size_t j = 0; j < n; ++j) {
    if (j == target) continue;
    w[j] = total > 0 ? panel.amounts(idx(j), idx(slot)) / total : 1.0 / static_cast<double>(n - 1);
  }
  return w;
}

PeerAggregate peer_aggregate(const ReturnPanel& panel, std::string_view target) {
  if (panel.stock_count() < 2) throw InputError("peer_aggregate: panel needs at least two stocks");
  const auto ti = panel.index_of(target);
  if (!ti) throw InputError("peer_aggregate: unknown stock '" + std::string(target) + "'");
  const std::size_t n = panel.stock_count(), T = panel.slot_count();
  PeerAggregate out{std::string(target), std::vector<double>(T, 0.0)};
  for (std::size_t t = 0; t < T; ++t) {
    double total = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != *ti) total += panel.amounts(idx(j), idx(t));
    double acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == *ti) continue;
      const double w = total > 0 ? panel.amounts(idx(j), idx(t)) / total : 1.0 / static_cast<double>(n - 1);
      acc += w * panel.excess(idx(j), idx(t));
    }
    out.series[t] = acc;
  }
  return out;
}

ReturnBuildResult build_return_panel(const BarPanel& bars, std::size_t exclusion_threshold) {
  const auto& cal = bars.calendar;
  const std::size_t T = cal.slot_count();
  const int ipd = cal.intervals_per_day();

  std::vector<std::optional<double>> unit(cal.day_count(), 1.0);
  const auto bf = bars.factors.find(bars.benchmark.code);
  auto bench = adjusted_return_series(bars.benchmark, bf != bars.factors.end() ? bf->second : unit, ipd);
  if (T > 0) bench[0] = 0.0;  // no predecessor for the first calendar slot

  ReturnBuildResult out;
  RawReturnPanel raw;
  raw.calendar = cal;
  std::vector<std::vector<double>> rets;
  std::vector<std::vector<double>> amts;
  for (const auto& [code, series] : bars.stocks) {
    const std::size_t missing = missing_count(series);
    if (missing > exclusion_threshold) {
      out.excluded.push_back(code);
      continue;
    }
    auto f = bars.factors.find(code);
    if (f == bars.factors.end()) throw InputError("no adjustment factors for " + code);
    rets.push_back(excess_returns(adjusted_return_series(series, f->second, ipd), bench));
    std::vector<double> a(T, kNaN);
    for (std::size_t t = 0; t < T; ++t)
      if (series.slots[t]) a[t] = series.slots[t]->amount;
    amts.push_back(std::move(a));
    raw.codes.push_back(code);
    raw.missing_bars.push_back(missing);
  }
  if (raw.codes.empty()) throw InputError("no stock survives the missing-bar exclusion rule");

  raw.returns.resize(idx(raw.codes.size()), idx(T));
  raw.amounts.resize(idx(raw.codes.size()), idx(T));
  for (std::size_t i = 0; i < raw.codes.size(); ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      raw.returns(idx(i), idx(t)) = rets[i][t];
      raw.amounts(idx(i), idx(t)) = amts[i][t];
    }
  }

  auto r = impute_returns(raw, exclusion_threshold);
  auto a = impute_volume(raw.amounts, cal, raw.codes);
  ReturnPanel& p = out.panel;
  p.calendar = cal;
  p.codes = raw.codes;
  p.excess = std::move(r.values);
  p.return_imputed = std::move(r.mask);
  p.amounts = std::move(a.values);
  p.amount_imputed = std::move(a.mask);
  for (Index i = 0; i < p.return_imputed.rows(); ++i)
    for (Index t = 0; t < p.return_imputed.cols(); ++t)
      if (p.return_imputed(i, t)) p.audit.push_back({p.codes[static_cast<std::size_t>(i)], static_cast<std::size_t>(t), "zero"});
  p.audit.insert(p.audit.end(), a.audit.begin(), a.audit.end());
  return out;
}

void write_returns_csv(const std::filesystem::path& path, const ReturnPanel& panel, const std::string& config_digest) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  if (!config_digest.empty()) out << "# config_digest=" << config_digest << '\n';
  out << "code,timestamp,excess_return,amount,imputed_flag\n";
  for (std::size_t i = 0; i < panel.stock_count(); ++i) {
    const std::string code = csv::quote(panel.codes[i]);
    for (std::size_t t = 0; t < panel.slot_count(); ++t) {
      const int flag = (panel.return_imputed(idx(i), idx(t)) ? 1 : 0) | (panel.amount_imputed(idx(i), idx(t)) ? 2 : 0);
      out << code << ',' << panel.calendar.timestamp(t) << ',' << csv::format_double(panel.excess(idx(i), idx(t)))
          << ',' << csv::format_double(panel.amounts(idx(i), idx(t))) << ',' << flag << '\n';
    }
  }
}

ReturnPanel read_returns_csv(const std::filesystem::path& path, const TradingCalendar& calendar) {
  const auto table = csv::read(path);
  const std::size_t c_code = table.column("code"), c_ts = table.column("timestamp"),
                    c_ret = table.column("excess_return"), c_amt = table.column("amount"),
                    c_flag = table.column("imputed_flag");
  std::map<std::string, std::size_t> index;
  for (const auto& row : table.rows) index.emplace(row.fields[c_code], 0);
  ReturnPanel p;
  p.calendar = calendar;
  for (auto& [code, i] : index) {
    i = p.codes.size();
    p.codes.push_back(code);
  }
  const std::size_t n = p.codes.size(), T = calendar.slot_count();
  p.excess = Eigen::MatrixXd::Constant(idx(n), idx(T), kNaN);
  p.amounts = Eigen::MatrixXd::Constant(idx(n), idx(T), kNaN);
  p.return_imputed = Mask::Zero(idx(n), idx(T));
  p.amount_imputed = Mask::Zero(idx(n), idx(T));
  for (const auto& row : table.rows) {
    const auto loc = path.string() + ":" + std::to_string(row.line) + ": ";
    const auto slot = calendar.slot_of(row.fields[c_ts]);
    if (!slot) throw InputError(loc + "timestamp outside calendar");
    const Index i = idx(index[row.fields[c_code]]), t = idx(*slot);
    double r = 0, a = 0, f = 0;
    if (!csv::parse_double(row.fields[c_ret], r) || !csv::parse_double(row.fields[c_amt], a) ||
        !csv::parse_double(row.fields[c_flag], f))
      throw InputError(loc + "malformed returns row");
    if (!std::isnan(p.excess(i, t))) throw InputError(loc + "duplicate slot");
    p.excess(i, t) = r;
    p.amounts(i, t) = a;
    p.return_imputed(i, t) = (static_cast<int>(f) & 1) ? 1 : 0;
    p.amount_imputed(i, t) = (static_cast<int>(f) & 2) ? 1 : 0;
  }
  if (!p.excess.allFinite() || !p.amounts.allFinite())
    throw InputError(path.string() + ": returns panel is incomplete");
  return p;
}

}  // namespace comove
