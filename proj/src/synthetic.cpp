#include "comove/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "comove/csv.hpp"
#include "comove/error.hpp"
#include "comove/pipeline.hpp"
#include "comove/rng.hpp"
#include "comove/var.hpp"

namespace comove {

namespace {

double round_to(double x, double scale) { return std::round(x * scale) / scale; }

std::vector<std::string> weekdays_from(const std::string& start, int count) {
  using namespace std::chrono;
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(start.c_str(), "%d-%u-%u", &y, &m, &d) != 3) throw InputError("bad start_date '" + start + "'");
  year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw InputError("bad start_date '" + start + "'");
  sys_days day_point{ymd};
  std::vector<std::string> out;
  while (static_cast<int>(out.size()) < count) {
    const weekday wd{day_point};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day cur{day_point};
      char buf[32];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(cur.year()),
                    static_cast<unsigned>(cur.month()), static_cast<unsigned>(cur.day()));
      out.emplace_back(buf);
    }
    day_point += days{1};
  }
  return out;
}

const std::vector<std::string> kCapitalLevels = {"7.50%", "7.75%", "8.00%", "8.25%", "8.50%"};
const char* kCapitalVariable = "Core Tier 1 adequacy ratio regulatory requirement";
const char* kLoanVariable = "Total Loan Still Needs to Be Reduced Ratio bool";

// Lower Cholesky factor, written out longhand so the oracle shares no code
// with the analytic path.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double s = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    if (!(s > 0)) throw NumericalError("cholesky: matrix is not positive definite");
    l(j, j) = std::sqrt(s);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double t = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
      l(i, j) = t / l(j, j);
    }
  }
  return l;
}

}  // namespace

void SyntheticScenario::set(const std::string& key, const std::string& value) {
  auto num = [&] {
    double d = 0;
    if (!csv::parse_double(value, d)) throw InputError("scenario: '" + key + "' expects a number");
    return d;
  };
  auto integer = [&] {
    const double d = num();
    if (d != std::floor(d)) throw InputError("scenario: '" + key + "' expects an integer");
    return static_cast<long long>(d);
  };
  if (key == "seed") seed = static_cast<std::uint64_t>(integer());
  else if (key == "stocks") stocks = static_cast<int>(integer());
  else if (key == "days") days = static_cast<int>(integer());
  else if (key == "intervals_per_day") intervals_per_day = static_cast<int>(integer());
  else if (key == "leaders") leaders = static_cast<int>(integer());
  else if (key == "leader_coefficient") leader_coefficient = num();
  else if (key == "own_ar") own_ar = num();
  else if (key == "shock_sd") shock_sd = num();
  else if (key == "shock_correlation") shock_correlation = num();
  else if (key == "benchmark_sd") benchmark_sd = num();
  else if (key == "missing_rate") missing_rate = num();
  else if (key == "excluded_stocks") excluded_stocks = static_cast<int>(integer());
  else if (key == "dividend") dividend = value == "true" || value == "1" || value == "yes";
  else if (key == "mean_amount") mean_amount = num();
  else if (key == "noise_variables") noise_variables = static_cast<int>(integer());
  else if (key == "linked_strength") linked_strength = num();
  else if (key == "start_date") start_date = value;
  else if (key == "benchmark_code") benchmark_code = value;
  else throw InputError("scenario: unknown key '" + key + "'");
}

void SyntheticScenario::validate() const {
  auto fail = [](const std::string& what) { throw InputError("scenario: " + what); };
  if (stocks < 2) fail("need at least 2 stocks");
  if (leaders < 0 || leaders >= stocks) fail("leaders must be in [0, stocks)");
  if (days < 2) fail("need at least 2 days");
  if (intervals_per_day < 1 || intervals_per_day * 5 > 14 * 60) fail("intervals_per_day out of range");
  if (!(shock_sd > 0) || !(benchmark_sd >= 0)) fail("shock_sd must be positive");
  if (!(shock_correlation > -1.0 / (stocks - 1)) || !(shock_correlation < 1)) fail("shock_correlation out of range");
  if (!(missing_rate >= 0 && missing_rate < 0.5)) fail("missing_rate must be in [0, 0.5)");
  if (excluded_stocks < 0) fail("excluded_stocks must be non-negative");
  if (!(mean_amount > 1)) fail("mean_amount must exceed 1");
  if (noise_variables < 0) fail("noise_variables must be non-negative");
  Eigen::MatrixXd a = own_ar * Eigen::MatrixXd::Identity(stocks, stocks);
  for (int f = leaders; f < stocks; ++f)
    for (int l = 0; l < leaders; ++l) a(f, l) = leader_coefficient;
  const auto fit = var_from_parameters(Eigen::VectorXd::Zero(stocks), {a}, Eigen::MatrixXd::Identity(stocks, stocks));
  if (!is_stable(fit)) fail("generator VAR is not stable");
}

std::string SyntheticScenario::code(int i) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sh.%06d", 600000 + i);
  return buf;
}

std::vector<SessionWindow> SyntheticScenario::sessions() const {
  if (intervals_per_day == 48) return TradingCalendar::default_sessions();
  return {{9 * 60 + 30, 9 * 60 + 30 + 5 * intervals_per_day}};
}

SyntheticScenario load_scenario(const std::filesystem::path& path) {
  SyntheticScenario s;
  for (const auto& [k, v] : read_key_values(path)) s.set(k, v);
  s.validate();
  return s;
}

SyntheticData generate_panel(const SyntheticScenario& sc) {
  sc.validate();
  SyntheticData out;
  const int n = sc.stocks;
  const int n_all = n + sc.excluded_stocks;
  const int ipd = sc.intervals_per_day;
  TradingCalendar calendar(weekdays_from(sc.start_date, sc.days), sc.sessions());
  const std::size_t T = calendar.slot_count();

  Eigen::MatrixXd a = sc.own_ar * Eigen::MatrixXd::Identity(n, n);
  for (int f = sc.leaders; f < n; ++f)
    for (int l = 0; l < sc.leaders; ++l) a(f, l) = sc.leader_coefficient;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(n, n, sc.shock_correlation);
  sigma.diagonal().setOnes();
  sigma *= sc.shock_sd * sc.shock_sd;
  const Eigen::MatrixXd chol = sigma.llt().matrixL();

  Rng shock_rng(sc.seed, 1), bench_rng(sc.seed, 2), amount_rng(sc.seed, 3), gap_rng(sc.seed, 4),
      fund_rng(sc.seed, 5), extra_rng(sc.seed, 6), wick_rng(sc.seed, 7);

  // Excess returns, stocks x slots, after a burn-in.
  const int burn_in = 200;
  Eigen::MatrixXd excess(n_all, static_cast<Eigen::Index>(T));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n), z(n);
  for (long t = -burn_in; t < static_cast<long>(T); ++t) {
    for (int i = 0; i < n; ++i) z(i) = shock_rng.normal();
    y = a * y + chol * z;
    if (t >= 0) excess.col(t).head(n) = y;
  }
  for (int e = n; e < n_all; ++e)
    for (std::size_t t = 0; t < T; ++t) excess(e, static_cast<Eigen::Index>(t)) = extra_rng.normal(0, sc.shock_sd);

  std::vector<double> bench_ret(T);
  for (auto& b : bench_ret) b = bench_rng.normal(0, sc.benchmark_sd);

  auto make_bar = [&](double prev, double close, double amount) {
    Bar bar;
    bar.open = round_to(prev, 1e6);
    bar.close = round_to(close, 1e6);
    bar.high = round_to(std::max(prev, close) * (1 + 0.0002 * std::abs(wick_rng.normal())), 1e6);
    bar.low = round_to(std::min(prev, close) * (1 - 0.0002 * std::abs(wick_rng.normal())), 1e6);
    bar.amount = round_to(amount, 100);
    bar.volume = round_to(amount / close, 100);
    return bar;
  };

  std::map<std::string, BarSeries> series;
  {
    BarSeries bench{sc.benchmark_code, std::vector<std::optional<Bar>>(T)};
    double p = 3000.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double next = p * (1 + bench_ret[t]);
      bench.slots[t] = make_bar(p, next, 5e8 * std::exp(0.3 * amount_rng.normal()));
      p = next;
    }
    series.emplace(bench.code, std::move(bench));
  }

  const int dividend_stock = sc.dividend ? std::min(sc.leaders, n - 1) : -1;
  const std::size_t dividend_day = calendar.day_count() / 2;
  const double dividend_factor = 1.05;
  for (int i = 0; i < n_all; ++i) {
    const std::string code = sc.code(i);
    BarSeries s{code, std::vector<std::optional<Bar>>(T)};
    std::vector<std::optional<double>> factors(calendar.day_count(), 1.0);
    if (i == dividend_stock)
      for (std::size_t d = dividend_day; d < calendar.day_count(); ++d) factors[d] = dividend_factor;
    const double scale = sc.mean_amount * std::exp(0.5 * amount_rng.normal());
    double adjusted = 100.0;
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t d = t / static_cast<std::size_t>(ipd);
      const double next = adjusted * (1 + bench_ret[t] + excess(i, static_cast<Eigen::Index>(t)));
      const double amount = scale * std::exp(0.5 * amount_rng.normal() - 0.125);
      const std::size_t prev_day = t == 0 ? 0 : (t - 1) / static_cast<std::size_t>(ipd);
      const Bar bar = make_bar(adjusted / *factors[prev_day], next / *factors[d], amount);
      adjusted = next;
      const bool excluded_gap = i >= n && d < 25;
      if (excluded_gap || gap_rng.uniform() < sc.missing_rate) continue;
      s.slots[t] = bar;
    }
    out.bars.factors[code] = std::move(factors);
    series.emplace(code, std::move(s));
  }
  out.bars = make_panel(calendar, std::move(series), std::move(out.bars.factors), sc.benchmark_code);

  // Fundamentals.
  FundamentalsTable& f = out.fundamentals;
  for (int i = 0; i < n_all; ++i) f.codes.push_back(sc.code(i));
  auto numeric = [&](std::string name) {
    Variable v;
    v.name = std::move(name);
    v.kind = VariableKind::Numeric;
    v.cells.resize(static_cast<std::size_t>(n_all));
    return v;
  };
  Variable size = numeric("total_assets");
  for (auto& c : size.cells) c = round_to(std::exp(12.0 + fund_rng.normal()), 100);
  Variable linked = numeric("linked_metric");
  for (int i = 0; i < n_all; ++i)
    linked.cells[static_cast<std::size_t>(i)] = (i < sc.leaders ? sc.linked_strength : 0.0) + fund_rng.normal();
  f.variables.push_back(std::move(size));
  f.variables.push_back(std::move(linked));
  for (int k = 1; k <= sc.noise_variables; ++k) {
    Variable v = numeric("noise_" + std::to_string(k));
    for (auto& c : v.cells) {
      const double x = fund_rng.normal();
      if (fund_rng.uniform() >= 0.05) c = x;
    }
    f.variables.push_back(std::move(v));
  }
  Variable sparse = numeric("sparse_metric");
  for (auto& c : sparse.cells) {
    const double x = fund_rng.normal();
    if (fund_rng.uniform() >= 0.4) c = x;
  }
  Variable large = numeric("large_metric");
  for (auto& c : large.cells) c = round_to(5000 + 1000 * fund_rng.normal(), 100);
  Variable rare = numeric("rare_metric");
  for (int i = 0; i < n_all; ++i) rare.cells[static_cast<std::size_t>(i)] = i == n - 1 ? 1.5 : 0.0;
  Variable capital;
  capital.name = kCapitalVariable;
  capital.kind = VariableKind::Categorical;
  for (int i = 0; i < n_all; ++i) capital.cells.emplace_back(kCapitalLevels[fund_rng.below(kCapitalLevels.size())]);
  Variable loan;
  loan.name = kLoanVariable;
  loan.kind = VariableKind::Boolean;
  for (int i = 0; i < n_all; ++i) loan.cells.emplace_back(fund_rng.uniform() < 0.5);
  f.variables.push_back(std::move(sparse));
  f.variables.push_back(std::move(large));
  f.variables.push_back(std::move(rare));
  f.variables.push_back(std::move(capital));
  f.variables.push_back(std::move(loan));

  for (int l = 0; l < sc.leaders; ++l) out.truth.leaders.push_back(sc.code(l));
  for (int e = n; e < n_all; ++e) out.truth.excluded.push_back(sc.code(e));
  out.truth.linked_variable = "linked_metric";
  out.truth.coefficients = a;
  out.truth.shock_covariance = sigma;
  return out;
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data) {
  std::filesystem::create_directories(dir);
  write_calendar(dir / "calendar.csv", data.bars.calendar);
  auto all = data.bars.stocks;
  all.emplace(data.bars.benchmark.code, data.bars.benchmark);
  write_bars(dir / "bars.csv", data.bars.calendar, all);
  write_factors(dir / "factors.csv", data.bars.calendar, data.bars.factors);
  write_fundamentals(dir / "fundamentals.csv", data.fundamentals);

  nlohmann::ordered_json truth;
  truth["leaders"] = data.truth.leaders;
  truth["excluded"] = data.truth.excluded;
  truth["linked_variable"] = data.truth.linked_variable;
  truth["sessions"] = TradingCalendar::format_sessions(data.bars.calendar.sessions());
  truth["benchmark_code"] = data.bars.benchmark.code;
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < data.truth.coefficients.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(data.truth.coefficients.cols()));
    for (Eigen::Index j = 0; j < data.truth.coefficients.cols(); ++j) r[static_cast<std::size_t>(j)] = data.truth.coefficients(i, j);
    rows.push_back(std::move(r));
  }
  truth["coefficients"] = rows;
  std::ofstream(dir / "truth.json") << truth.dump(2) << "\n";
}

std::vector<Eigen::MatrixXd> fevd_oracle(std::span<const Eigen::MatrixXd> coefficients, const Eigen::MatrixXd& sigma,
                                         int horizon, std::span<const int> ordering, std::size_t paths,
                                         std::uint64_t seed) {
  const Eigen::Index k = sigma.rows();
  const int p = static_cast<int>(coefficients.size());
  const int H = horizon;
  if (H < 1 || paths < 2 || static_cast<Eigen::Index>(ordering.size()) != k)
    throw InputError("fevd_oracle: bad arguments");

  // Impact matrix: column ordering[m] is the m-th orthogonal shock.
  Eigen::MatrixXd permuted(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) permuted(a, b) = sigma(ordering[a], ordering[b]);
  const Eigen::MatrixXd lp = cholesky_lower(permuted);
  Eigen::MatrixXd impact = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) impact(ordering[a], ordering[b]) = lp(a, b);

  auto draw = [&](std::size_t path, Eigen::MatrixXd& u) {  // H x k
    Rng rng(seed, path);
    for (int t = 0; t < H; ++t)
      for (Eigen::Index i = 0; i < k; ++i) u(t, i) = rng.normal();
  };

  // Pass 1: per-shock mean and H x H covariance of the draws.
  std::vector<Eigen::VectorXd> mean(static_cast<std::size_t>(k), Eigen::VectorXd::Zero(H));
  std::vector<Eigen::MatrixXd> second(static_cast<std::size_t>(k), Eigen::MatrixXd::Zero(H, H));
  Eigen::MatrixXd u(H, k);
  for (std::size_t path = 0; path < paths; ++path) {
    draw(path, u);
    for (Eigen::Index i = 0; i < k; ++i) {
      mean[i] += u.col(i);
      second[i].selfadjointView<Eigen::Lower>().rankUpdate(u.col(i));
    }
  }
  const double np = static_cast<double>(paths);
  std::vector<Eigen::MatrixXd> whiten(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    mean[i] /= np;
    Eigen::MatrixXd cov = second[i].selfadjointView<Eigen::Lower>();
    cov = cov / np - mean[i] * mean[i].transpose();
    whiten[i] = cholesky_lower(cov).inverse();
  }

  // Pass 2: run the recursion per shock and accumulate squared forecast errors.
  // acc[h](j, i): sum over paths of (error in j at step h+1 from shock i)^2.
  std::vector<Eigen::MatrixXd> acc(static_cast<std::size_t>(H), Eigen::MatrixXd::Zero(k, k));
  std::vector<Eigen::VectorXd> state(static_cast<std::size_t>(H));
  Eigen::VectorXd e(H);
  for (std::size_t path = 0; path < paths; ++path) {
    draw(path, u);
    for (Eigen::Index i = 0; i < k; ++i) {
      e.noalias() = whiten[i] * (u.col(i) - mean[i]);
      for (int t = 0; t < H; ++t) {
        Eigen::VectorXd x = impact.col(i) * e(t);
        for (int l = 1; l <= p && t - l >= 0; ++l) x.noalias() += coefficients[static_cast<std::size_t>(l - 1)] * state[t - l];
        state[t] = x;
        acc[t].col(i) += x.cwiseAbs2();
      }
    }
  }
  // Forecast start is a zero state, so the step-h value is the whole h-step forecast error.
  std::vector<Eigen::MatrixXd> shares(static_cast<std::size_t>(H));
  for (int h = 0; h < H; ++h) {
    shares[h] = acc[h];
    for (Eigen::Index j = 0; j < k; ++j) shares[h].row(j) /= acc[h].row(j).sum();
  }
  return shares;
}

RecoveryReport recovery_experiment(const SyntheticScenario& scenario, const RunConfig& base) {
  const auto data = generate_panel(scenario);
  RunConfig config = base;
  config.benchmark_code = scenario.benchmark_code;
  config.sessions = TradingCalendar::format_sessions(data.bars.calendar.sessions());
  const auto analysis = analyze(data.bars, data.fundamentals, config);

  RecoveryReport report;
  report.leaders = data.truth.leaders;
  report.linked_variable = data.truth.linked_variable;
  const auto dependents = dependent_variables(analysis.influence, analysis.tally);
  for (const auto& dep : dependents) {
    std::map<std::string, double> value;
    for (std::size_t i = 0; i < dep.codes.size(); ++i) value[dep.codes[i]] = dep.values[i];
    bool top = !report.leaders.empty();
    int worst = 1;
    for (const auto& leader : report.leaders) {
      const auto it = value.find(leader);
      if (it == value.end()) {
        top = false;
        worst = 0;
        continue;
      }
      int rank = 1;
      for (const auto& [code, v] : value) {
        if (std::find(report.leaders.begin(), report.leaders.end(), code) != report.leaders.end()) continue;
        if (v >= it->second) ++rank;
      }
      if (rank > 1) top = false;
      if (worst != 0) worst = std::max(worst, rank);
    }
    report.leader_top[dep.model] = top;
    report.leader_rank[dep.model] = worst;
  }
  for (const auto& entry : analysis.validation.entries) {
    if (entry.validated) report.validated_variables.push_back(entry.variable);
    if (entry.variable == report.linked_variable) {
      report.linked_validated = entry.validated;
      report.linked_models = entry.models;
    }
  }
  return report;
}

}  // namespace comove
