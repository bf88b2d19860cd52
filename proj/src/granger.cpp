#include "comove/granger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Dense>

#include "comove/csv.hpp"
#include "comove/distributions.hpp"
#include "comove/error.hpp"
#include "comove/ols.hpp"

namespace comove {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
}

// Rows t = start..T-1: [1, effect lags 1..own, cause lags 1..cross].
Eigen::MatrixXd lag_design(std::span<const double> effect, std::span<const double> cause, int start, int own,
                           int cross) {
  const int T = static_cast<int>(effect.size());
  Eigen::MatrixXd X(T - start, 1 + own + cross);
  for (int t = start; t < T; ++t) {
    const int r = t - start;
    X(r, 0) = 1.0;
    for (int l = 1; l <= own; ++l) X(r, l) = effect[static_cast<std::size_t>(t - l)];
    for (int l = 1; l <= cross; ++l) X(r, own + l) = cause[static_cast<std::size_t>(t - l)];
  }
  return X;
}

Eigen::VectorXd tail(std::span<const double> v, int start) {
  return Eigen::Map<const Eigen::VectorXd>(v.data() + start, static_cast<Eigen::Index>(v.size()) - start);
}

}  // namespace

GrangerResult granger_test(std::span<const double> effect, std::span<const double> cause, int lag_max) {
  if (effect.size() != cause.size()) throw InputError("granger_test: series lengths differ");
  if (lag_max < 1) throw InputError("granger_test: lag_max must be >= 1");
  const int T = static_cast<int>(effect.size());
  if (T < lag_max + 10)
    throw InputError("granger_test: insufficient observations (" + std::to_string(T) + " < lag_max + 10)");

  GrangerResult r;
  if (is_constant(cause)) {
    r.skip_reason = "constant cause series";
    return r;
  }
  if (is_constant(effect)) {
    r.skip_reason = "constant effect series";
    return r;
  }

  const Eigen::VectorXd y_common = tail(effect, lag_max);
  const double n_common = static_cast<double>(T - lag_max);
  double best = std::numeric_limits<double>::infinity();
  for (int l = 1; l <= lag_max; ++l) {
    const double rss = ols_rss(lag_design(effect, cause, lag_max, l, l), y_common);
    double sic = kNaN;
    if (!std::isnan(rss)) {
      sic = std::log(rss / n_common) + (2.0 * l + 1.0) * std::log(n_common) / n_common;
      if (sic < best) {
        best = sic;
        r.lag = l;
      }
    }
    r.sic.push_back(sic);
  }
  if (r.lag == 0) {
    r.skip_reason = "rank-deficient lag design";
    return r;
  }

  const int l = r.lag;
  const Eigen::VectorXd y = tail(effect, l);
  const double rss_u = ols_rss(lag_design(effect, cause, l, l, l), y);
  const double rss_r = ols_rss(lag_design(effect, cause, l, l, 0), y);
  if (std::isnan(rss_u) || std::isnan(rss_r)) {
    r.lag = 0;
    r.skip_reason = "rank-deficient lag design";
    return r;
  }
  const double dof = static_cast<double>(T - l) - (2.0 * l + 1.0);
  r.tested = true;
  if (rss_u <= 0) {
    r.f_statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
  } else {
    r.f_statistic = std::max(0.0, (rss_r - rss_u) / l) / (rss_u / dof);
    r.p_value = dist::f_upper(r.f_statistic, l, dof);
  }
  return r;
}

std::vector<int> GrangerDayOutcome::cause_counts() const {
  const std::size_t k = n();
  std::vector<int> counts(k, 0);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t e = 0; e < k; ++e)
      if (c != e && significant[at(c, e)]) ++counts[c];
  return counts;
}

GrangerDayOutcome daily_matrix(const ReturnPanel& panel, std::size_t day, int lag_max, double alpha) {
  const auto& cal = panel.calendar;
  if (day >= cal.day_count()) throw InputError("daily_matrix: day index outside calendar");
  const std::size_t n = panel.stock_count();
  const auto ipd = static_cast<std::size_t>(cal.intervals_per_day());
  const auto first = static_cast<Eigen::Index>(cal.slot(day, 0));

  std::vector<std::vector<double>> series(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = panel.excess.row(static_cast<Eigen::Index>(i)).segment(first, static_cast<Eigen::Index>(ipd));
    series[i].assign(row.begin(), row.end());
  }

  GrangerDayOutcome out;
  out.date = cal.dates()[day];
  out.codes = panel.codes;
  out.p_values.assign(n * n, kNaN);
  out.lags.assign(n * n, 0);
  out.tested.assign(n * n, 0);
  out.significant.assign(n * n, 0);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t e = 0; e < n; ++e) {
      if (c == e) continue;
      const auto g = granger_test(series[e], series[c], lag_max);
      const auto k = out.at(c, e);
      if (!g.tested) {
        out.skipped.push_back(panel.codes[c] + "->" + panel.codes[e] + ": " + g.skip_reason);
        continue;
      }
      out.tested[k] = 1;
      out.p_values[k] = g.p_value;
      out.lags[k] = g.lag;
      out.significant[k] = g.p_value < alpha ? 1 : 0;
    }
  }
  return out;
}

std::size_t InfluenceTally::index_of(const std::string& code) const {
  for (std::size_t i = 0; i < codes.size(); ++i)
    if (codes[i] == code) return i;
  throw InputError("tally: unknown stock '" + code + "'");
}

InfluenceTally tally(std::span<const GrangerDayOutcome> outcomes) {
  InfluenceTally t;
  if (outcomes.empty()) return t;
  t.codes = outcomes.front().codes;
  const std::size_t n = t.codes.size();
  t.top_influencer_days.assign(n, 0);
  t.total_causal_impacts.assign(n, 0);
  for (const auto& day : outcomes) {
    if (day.codes != t.codes) throw InputError("tally: day " + day.date + " has a different stock universe");
    const auto counts = day.cause_counts();
    const int best = *std::max_element(counts.begin(), counts.end());
    for (std::size_t i = 0; i < n; ++i) {
      t.total_causal_impacts[i] += counts[i];
      if (best > 0 && counts[i] == best) ++t.top_influencer_days[i];
    }
  }
  t.times_log.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    t.times_log[i] = t.total_causal_impacts[i] > 0 ? std::log(static_cast<double>(t.total_causal_impacts[i])) : 0.0;
  return t;
}

void write_granger_daily(const std::filesystem::path& path, std::span<const GrangerDayOutcome> outcomes,
                         const std::string& config_digest) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  if (!config_digest.empty()) out << "# config_digest=" << config_digest << '\n';
  out << "date,cause,effect,lag,p_value,significant\n";
  for (const auto& day : outcomes) {
    for (std::size_t c = 0; c < day.n(); ++c) {
      for (std::size_t e = 0; e < day.n(); ++e) {
        if (c == e) continue;
        const auto k = day.at(c, e);
        out << day.date << ',' << csv::quote(day.codes[c]) << ',' << csv::quote(day.codes[e]) << ',';
        if (day.tested[k]) out << day.lags[k] << ',' << csv::format_double(day.p_values[k]);
        else out << ',';
        out << ',' << int(day.significant[k]) << '\n';
      }
    }
  }
}

void write_granger_tally(const std::filesystem::path& path, const InfluenceTally& t, const std::string& config_digest) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  if (!config_digest.empty()) out << "# config_digest=" << config_digest << '\n';
  out << "code,bool_days,total,times_log\n";
  for (std::size_t i = 0; i < t.codes.size(); ++i)
    out << csv::quote(t.codes[i]) << ',' << t.top_influencer_days[i] << ',' << t.total_causal_impacts[i] << ','
        << csv::format_double(t.times_log[i]) << '\n';
}

InfluenceTally read_granger_tally(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const std::size_t c_code = table.column("code"), c_days = table.column("bool_days"),
                    c_total = table.column("total"), c_log = table.column("times_log");
  InfluenceTally t;
  for (const auto& row : table.rows) {
    double days = 0, total = 0, lg = 0;
    if (!csv::parse_double(row.fields[c_days], days) || !csv::parse_double(row.fields[c_total], total) ||
        !csv::parse_double(row.fields[c_log], lg))
      throw InputError(path.string() + ":" + std::to_string(row.line) + ": malformed tally row");
    t.codes.push_back(row.fields[c_code]);
    t.top_influencer_days.push_back(static_cast<int>(days));
    t.total_causal_impacts.push_back(static_cast<long>(total));
    t.times_log.push_back(lg);
  }
  return t;
}

}  // namespace comove
