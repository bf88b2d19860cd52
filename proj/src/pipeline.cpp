#include "comove/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "comove/csv.hpp"
#include "comove/digest.hpp"
#include "comove/error.hpp"
#include "comove/parallel.hpp"
#include "comove/synthetic.hpp"

namespace comove {

using json = nlohmann::ordered_json;

FevdConfig fevd_config(const RunConfig& config) {
  FevdConfig f;
  f.horizon = config.fevd_horizon;
  f.p_max = config.var_p_max;
  f.target_first = config.cholesky_ordering == "target_first";
  return f;
}

PrepConfig prep_config(const RunConfig& config) {
  PrepConfig p;
  p.missing_threshold = config.fundamentals_missing_threshold;
  p.log_mean_threshold = config.log_mean_threshold;
  p.support_numerator = config.one_hot_support_numerator;
  p.size_variable = config.size_variable;
  return p;
}

std::vector<InfluenceOutcome> compute_influence(const ReturnPanel& panel, const RunConfig& config) {
  std::vector<std::string> codes = panel.codes;
  std::sort(codes.begin(), codes.end());
  std::vector<InfluenceOutcome> out(codes.size());
  const auto fc = fevd_config(config);
  parallel_for(codes.size(), config.workers, [&](std::size_t i) {
    auto& o = out[i];
    o.code = codes[i];
    try {
      o.report = fevd_influence(panel, codes[i], fc);
      o.status = o.report.stable ? "ok" : "unstable";
    } catch (const NumericalError& e) {
      o.status = "error";
      o.error = e.what();
      o.report.code = codes[i];
    }
  });
  return out;
}

std::vector<GrangerDayOutcome> compute_granger(const ReturnPanel& panel, const RunConfig& config) {
  std::vector<GrangerDayOutcome> out(panel.calendar.day_count());
  parallel_for(out.size(), config.workers, [&](std::size_t d) {
    out[d] = daily_matrix(panel, d, config.granger_lag_max, config.granger_alpha);
  });
  return out;
}

std::vector<DependentVariable> dependent_variables(const std::vector<InfluenceOutcome>& influence,
                                                   const InfluenceTally& tally) {
  std::vector<DependentVariable> out;
  for (const auto& model : kModels) out.push_back({model, {}, {}});
  std::vector<std::size_t> order(tally.codes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tally.codes[a] < tally.codes[b]; });
  for (std::size_t i : order) {
    out[0].codes.push_back(tally.codes[i]);
    out[0].values.push_back(static_cast<double>(tally.top_influencer_days[i]));
    out[1].codes.push_back(tally.codes[i]);
    out[1].values.push_back(tally.times_log[i]);
  }
  for (const auto& o : influence) {
    if (o.status != "ok") continue;
    out[2].codes.push_back(o.code);
    out[2].values.push_back(o.report.sum_fevd);
    out[3].codes.push_back(o.code);
    out[3].values.push_back(o.report.influence_per_unit_trade);
  }
  return out;
}

std::vector<RegressionOutput> run_regressions(const EncodedDesignMatrix& design,
                                              const std::vector<DependentVariable>& dependents,
                                              const RunConfig& config) {
  std::map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < design.codes.size(); ++i) row_of[design.codes[i]] = static_cast<Eigen::Index>(i);
  const auto names = design.column_names();
  const StepwiseConfig sc{config.condition_ceiling, config.p_screen};

  std::vector<RegressionOutput> out(dependents.size());
  parallel_for(dependents.size(), config.workers, [&](std::size_t m) {
    const auto& dep = dependents[m];
    std::vector<Eigen::Index> rows;
    std::vector<double> y;
    std::vector<std::string> dropped;
    for (std::size_t i = 0; i < dep.codes.size(); ++i) {
      auto it = row_of.find(dep.codes[i]);
      if (it == row_of.end()) {
        dropped.push_back(dep.codes[i]);
        continue;
      }
      rows.push_back(it->second);
      y.push_back(dep.values[i]);
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), design.values.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) X.row(static_cast<Eigen::Index>(r)) = design.values.row(rows[r]);
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    auto& o = out[m];
    o.result = stepwise_prune(X, names, yv, dep.model, sc);
    for (const auto& c : dropped) o.result.warnings.push_back("no fundamentals row for " + c);
    if (o.result.surviving.size() >= 2) {
      std::vector<Eigen::Index> cols;
      for (const auto& s : o.result.surviving)
        cols.push_back(static_cast<Eigen::Index>(std::find(names.begin(), names.end(), s) - names.begin()));
      Eigen::MatrixXd kept(X.rows(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) kept.col(static_cast<Eigen::Index>(c)) = X.col(cols[c]);
      if (kept.rows() > kept.cols()) o.vif = vif_report(kept);
    } else if (o.result.surviving.size() == 1) {
      o.vif = {1.0};
    }
  });
  return out;
}

ValidationReport validate_models(const std::vector<RegressionOutput>& regressions, const EncodedDesignMatrix& design,
                                 const RunConfig& config) {
  std::vector<StepwiseResult> results;
  for (const auto& r : regressions) results.push_back(r.result);
  return cross_validate(results, design.column_sources(), config.validation_p,
                        static_cast<std::size_t>(config.validation_min_models), kModels.size());
}

AnalysisResult analyze(const BarPanel& bars, const FundamentalsTable& fundamentals, const RunConfig& config) {
  config.validate();
  AnalysisResult a;
  a.returns = build_return_panel(bars, config.missing_bar_threshold);
  const auto& panel = a.returns.panel;

  FundamentalsTable retained;
  for (std::size_t i = 0; i < fundamentals.codes.size(); ++i) {
    if (!panel.index_of(fundamentals.codes[i])) continue;
    retained.codes.push_back(fundamentals.codes[i]);
  }
  for (const auto& v : fundamentals.variables) {
    Variable w = v;
    w.cells.clear();
    for (std::size_t i = 0; i < fundamentals.codes.size(); ++i)
      if (panel.index_of(fundamentals.codes[i])) w.cells.push_back(v.cells[i]);
    retained.variables.push_back(std::move(w));
  }
  a.prepared = prepare_fundamentals(retained, prep_config(config));
  a.influence = compute_influence(panel, config);
  a.granger = compute_granger(panel, config);
  a.tally = tally(a.granger);
  a.regressions = run_regressions(a.prepared.design, dependent_variables(a.influence, a.tally), config);
  a.validation = validate_models(a.regressions, a.prepared.design, config);
  return a;
}

// ---------------------------------------------------------------- influence I/O

void write_influence_csv(const std::filesystem::path& path, const std::vector<InfluenceOutcome>& influence,
                         const std::string& config_digest) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  if (!config_digest.empty()) out << "# config_digest=" << config_digest << '\n';
  out << "code,status,lag_order,stable,mean_amount,sum_fevd,influence_per_unit_trade\n";
  for (const auto& o : influence) {
    if (o.status == "error") {
      csv::write_record(out, {o.code, o.status, "", "", "", "", ""});
      continue;
    }
    const auto& r = o.report;
    csv::write_record(out, {o.code, o.status, std::to_string(r.lag_order), r.stable ? "1" : "0",
                            csv::format_double(r.mean_amount), csv::format_double(r.sum_fevd),
                            csv::format_double(r.influence_per_unit_trade)});
  }
}

std::vector<InfluenceOutcome> read_influence_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const std::size_t c_code = table.column("code"), c_status = table.column("status"), c_lag = table.column("lag_order"),
                    c_stable = table.column("stable"), c_amount = table.column("mean_amount"),
                    c_sum = table.column("sum_fevd"), c_unit = table.column("influence_per_unit_trade");
  std::vector<InfluenceOutcome> out;
  for (const auto& row : table.rows) {
    InfluenceOutcome o;
    o.code = row.fields[c_code];
    o.status = row.fields[c_status];
    o.report.code = o.code;
    const auto bad = [&] { return InputError(path.string() + ":" + std::to_string(row.line) + ": malformed influence row"); };
    if (o.status == "ok" || o.status == "unstable") {
      double lag = 0;
      if (!csv::parse_double(row.fields[c_lag], lag) || !csv::parse_double(row.fields[c_amount], o.report.mean_amount) ||
          !csv::parse_double(row.fields[c_sum], o.report.sum_fevd) ||
          !csv::parse_double(row.fields[c_unit], o.report.influence_per_unit_trade))
        throw bad();
      o.report.lag_order = static_cast<int>(lag);
      o.report.stable = row.fields[c_stable] == "1";
    } else if (o.status != "error") {
      throw bad();
    }
    out.push_back(std::move(o));
  }
  return out;
}

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json adf_json(const AdfResult& a) {
  return json{{"statistic", number(a.statistic)}, {"lags", a.lags},           {"observations", a.observations},
              {"critical_1", a.critical_1},       {"critical_5", a.critical_5}, {"critical_10", a.critical_10},
              {"reject_unit_root", a.reject_unit_root}};
}

}  // namespace

std::string fevd_report_json(const std::vector<InfluenceOutcome>& influence, const std::string& config_digest) {
  json j;
  if (!config_digest.empty()) j["config_digest"] = config_digest;
  auto& stocks = j["stocks"] = json::array();
  for (const auto& o : influence) {
    json s;
    s["code"] = o.code;
    s["status"] = o.status;
    if (o.status == "error") {
      s["error"] = o.error;
      stocks.push_back(std::move(s));
      continue;
    }
    const auto& r = o.report;
    s["lag_order"] = r.lag_order;
    auto& bic = s["bic"] = json::array();
    for (double b : r.bic) bic.push_back(number(b));
    s["stable"] = r.stable;
    s["eigenvalue_moduli"] = r.eigenvalue_moduli;
    s["ordering"] = r.ordering;
    const std::array<std::string, 2> names{r.code, "peer_aggregate"};
    for (std::size_t v = 0; v < 2; ++v) {
      json d;
      d["durbin_watson"] = number(r.durbin_watson[v]);
      d["jarque_bera"] = {{"statistic", number(r.jarque_bera[v].statistic)},
                          {"p_value", number(r.jarque_bera[v].p_value)},
                          {"skewness", number(r.jarque_bera[v].skewness)},
                          {"kurtosis", number(r.jarque_bera[v].kurtosis)}};
      d["adf"] = r.adf_available ? adf_json(r.adf[v]) : json(nullptr);
      s["diagnostics"][names[v]] = std::move(d);
    }
    auto& shares = s["shares"] = json::array();
    for (std::size_t h = 0; h < r.shares.size(); ++h) {
      const auto& x = r.shares[h];
      shares.push_back({{"horizon", h + 1},
                        {"target", {{"target_shock", x[0]}, {"peer_shock", x[1]}}},
                        {"peer_aggregate", {{"target_shock", x[2]}, {"peer_shock", x[3]}}}});
    }
    s["mean_amount"] = r.mean_amount;
    s["sum_fevd"] = r.sum_fevd;
    s["influence_per_unit_trade"] = r.influence_per_unit_trade;
    stocks.push_back(std::move(s));
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- stages

namespace {

namespace fs = std::filesystem;

struct Stage {
  const RunConfig& config;
  std::string name;
  std::string digest;
  std::vector<std::pair<std::string, fs::path>> inputs;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, std::string>> summary;

  Stage(const RunConfig& c, std::string n) : config(c), name(std::move(n)), digest(c.digest()) {
    fs::create_directories(c.out_dir);
  }

  fs::path out(const std::string& file) {
    outputs.push_back(file);
    return config.out_dir / file;
  }
  fs::path raw_input(const fs::path& p) {
    const fs::path path = config.input(p);
    if (!fs::exists(path)) throw InputError("missing input " + path.string());
    inputs.emplace_back(path.filename().string(), path);
    return path;
  }
  fs::path upstream(const std::string& file, const std::string& producer) {
    const fs::path path = config.out_dir / file;
    if (!fs::exists(path))
      throw InputError("upstream stage missing: " + file + " not found in " + config.out_dir.string() + "; run `" +
                       producer + "` first");
    inputs.emplace_back(file, path);
    return path;
  }
  void note(const std::string& key, const std::string& value) { summary.emplace_back(key, value); }
  void note(const std::string& key, std::size_t value) { summary.emplace_back(key, std::to_string(value)); }

  void finish(std::ostream& log) {
    const std::string ext = config.report_format;
    const fs::path summary_path = config.out_dir / ("summary_" + name + "." + ext);
    {
      std::ofstream s(summary_path);
      if (!s) throw InputError("cannot write " + summary_path.string());
      if (ext == "json") {
        json j;
        j["config_digest"] = digest;
        j["stage"] = name;
        for (const auto& [k, v] : summary) j["metrics"][k] = v;
        s << j.dump(2) << "\n";
      } else {
        s << "# config_digest=" << digest << "\nstage,metric,value\n";
        for (const auto& [k, v] : summary) csv::write_record(s, {name, k, v});
      }
    }
    outputs.push_back(summary_path.filename().string());

    json m;
    m["stage"] = name;
    m["version"] = kVersion;
    m["config_digest"] = digest;
    for (const auto& [k, v] : config.parameters()) m["config"][k] = v;
    m["inputs"] = json::object();
    for (const auto& [label, path] : inputs) m["inputs"][label] = sha256_file(path);
    m["outputs"] = json::object();
    for (const auto& file : outputs) m["outputs"][file] = sha256_file(config.out_dir / file);
    std::ofstream(config.out_dir / ("manifest_" + name + ".json")) << m.dump(2) << "\n";
    for (const auto& [k, v] : summary) log << name << ": " << k << " = " << v << "\n";
  }
};

TradingCalendar stage_calendar(Stage& s) {
  return load_calendar(s.raw_input(s.config.calendar), TradingCalendar::parse_sessions(s.config.sessions));
}

BarPanel stage_bars(Stage& s) {
  auto calendar = stage_calendar(s);
  auto series = load_bars(s.raw_input(s.config.bars), calendar);
  auto factors = load_factors(s.raw_input(s.config.factors), calendar);
  return make_panel(std::move(calendar), std::move(series), std::move(factors), s.config.benchmark_code);
}

std::set<std::string> retained_codes(const fs::path& summary) {
  const auto t = csv::read(summary);
  const std::size_t c_code = t.column("code"), c_ex = t.column("excluded");
  std::set<std::string> out;
  for (const auto& r : t.rows)
    if (r.fields[c_ex] == "0") out.insert(r.fields[c_code]);
  return out;
}

void stage_ingest(const RunConfig& config, std::ostream& log) {
  Stage s(config, "ingest");
  const auto bars = stage_bars(s);
  std::ofstream out(s.out("ingest_summary.csv"));
  out << "# config_digest=" << s.digest << "\ncode,present_bars,missing_bars,excluded\n";
  std::size_t excluded = 0;
  for (const auto& [code, series] : bars.stocks) {
    const bool ex = missing_count(series) > config.missing_bar_threshold;
    excluded += ex;
    csv::write_record(out, {code, std::to_string(present_count(series)), std::to_string(missing_count(series)),
                            ex ? "1" : "0"});
  }
  out.close();
  s.note("trading_days", bars.calendar.day_count());
  s.note("intervals_per_day", static_cast<std::size_t>(bars.calendar.intervals_per_day()));
  s.note("stocks", bars.stocks.size());
  s.note("excluded_stocks", excluded);
  s.finish(log);
}

void stage_returns(const RunConfig& config, std::ostream& log) {
  Stage s(config, "returns");
  s.upstream("ingest_summary.csv", "ingest");
  const auto bars = stage_bars(s);
  const auto built = build_return_panel(bars, config.missing_bar_threshold);
  write_returns_csv(s.out("returns.csv"), built.panel, s.digest);
  {
    std::ofstream audit(s.out("imputation_audit.csv"));
    audit << "# config_digest=" << s.digest << "\ncode,timestamp,method\n";
    for (const auto& e : built.panel.audit)
      csv::write_record(audit, {e.code, built.panel.calendar.timestamp(e.slot), e.method});
  }
  s.note("stocks", built.panel.stock_count());
  s.note("excluded_stocks", built.excluded.size());
  s.note("imputed_returns", static_cast<std::size_t>(built.panel.return_imputed.cast<int>().sum()));
  s.note("imputed_amounts", static_cast<std::size_t>(built.panel.amount_imputed.cast<int>().sum()));
  s.finish(log);
}

void stage_prep(const RunConfig& config, std::ostream& log) {
  Stage s(config, "prep");
  const auto retained = retained_codes(s.upstream("ingest_summary.csv", "ingest"));
  std::set<std::string> known;
  {
    const auto t = csv::read(config.out_dir / "ingest_summary.csv");
    for (const auto& r : t.rows) known.insert(r.fields[t.column("code")]);
  }
  const auto raw = load_fundamentals(s.raw_input(config.fundamentals), known);
  FundamentalsTable table;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < raw.codes.size(); ++i)
    if (retained.count(raw.codes[i])) {
      keep.push_back(i);
      table.codes.push_back(raw.codes[i]);
    }
  for (const auto& v : raw.variables) {
    Variable w = v;
    w.cells.clear();
    for (std::size_t i : keep) w.cells.push_back(v.cells[i]);
    table.variables.push_back(std::move(w));
  }
  const auto prepared = prepare_fundamentals(table, prep_config(config));
  write_design_matrix(s.out("design_matrix.csv"), prepared.design, s.digest);
  std::ofstream(s.out("encoding_report.json")) << encoding_report_json(prepared.log, prepared.design, s.digest);
  std::size_t dropped = 0;
  for (const auto& v : prepared.log.variables) dropped += v.dropped;
  s.note("stocks", prepared.design.codes.size());
  s.note("raw_variables", raw.variables.size());
  s.note("dropped_variables", dropped);
  s.note("encoded_columns", prepared.design.columns.size());
  s.finish(log);
}

ReturnPanel stage_returns_panel(Stage& s) {
  const auto calendar = stage_calendar(s);
  return read_returns_csv(s.upstream("returns.csv", "returns"), calendar);
}

void stage_fevd(const RunConfig& config, std::ostream& log) {
  Stage s(config, "fevd");
  const auto panel = stage_returns_panel(s);
  const auto influence = compute_influence(panel, config);
  write_influence_csv(s.out("influence.csv"), influence, s.digest);
  std::ofstream(s.out("fevd_report.json")) << fevd_report_json(influence, s.digest);
  std::size_t ok = 0, unstable = 0, failed = 0;
  for (const auto& o : influence) {
    ok += o.status == "ok";
    unstable += o.status == "unstable";
    failed += o.status == "error";
  }
  s.note("stable_fits", ok);
  s.note("unstable_fits", unstable);
  s.note("failed_fits", failed);
  s.finish(log);
  if (ok == 0) throw NumericalError("no stable VAR fits");
}

void stage_granger(const RunConfig& config, std::ostream& log) {
  Stage s(config, "granger");
  const auto panel = stage_returns_panel(s);
  const auto days = compute_granger(panel, config);
  const auto t = tally(days);
  write_granger_daily(s.out("granger_daily.csv"), days, s.digest);
  write_granger_tally(s.out("granger_tally.csv"), t, s.digest);
  std::size_t skipped = 0, significant = 0;
  {
    std::ofstream skips(s.out("granger_skipped.csv"));
    skips << "# config_digest=" << s.digest << "\ndate,pair,reason\n";
    for (const auto& d : days) {
      skipped += d.skipped.size();
      for (char c : d.significant) significant += c != 0;
      for (const auto& entry : d.skipped) {
        const auto colon = entry.find(": ");
        csv::write_record(skips, {d.date, entry.substr(0, colon), colon == std::string::npos ? "" : entry.substr(colon + 2)});
      }
    }
  }
  s.note("days", days.size());
  s.note("significant_edges", significant);
  s.note("skipped_pairs", skipped);
  s.finish(log);
}

void stage_regress(const RunConfig& config, std::ostream& log) {
  Stage s(config, "regress");
  const auto influence = read_influence_csv(s.upstream("influence.csv", "fevd"));
  const auto t = read_granger_tally(s.upstream("granger_tally.csv", "granger"));
  const auto design_path = s.upstream("design_matrix.csv", "prep");
  const auto design = read_design_matrix(design_path, s.upstream("encoding_report.json", "prep"));
  const auto regressions = run_regressions(design, dependent_variables(influence, t), config);
  for (const auto& r : regressions) {
    write_regression_csv(s.out("regression_" + r.result.model + ".csv"), r.result, s.digest);
    std::ofstream(s.out("pruning_trace_" + r.result.model + ".json")) << pruning_trace_json(r.result, r.vif, s.digest);
    s.note(r.result.model + "_rows", r.result.rows);
    s.note(r.result.model + "_surviving", r.result.surviving.size());
  }
  s.finish(log);
}

void stage_validate(const RunConfig& config, std::ostream& log) {
  Stage s(config, "validate");
  const auto design = read_design_matrix(s.upstream("design_matrix.csv", "prep"),
                                         s.upstream("encoding_report.json", "prep"));
  std::vector<RegressionOutput> regressions;
  for (const auto& model : kModels)
    regressions.push_back({read_regression_csv(s.upstream("regression_" + model + ".csv", "regress"), model), {}});
  const auto report = validate_models(regressions, design, config);
  write_validation_csv(s.out("validated_determinants.csv"), report, s.digest);
  std::size_t validated = 0;
  for (const auto& e : report.entries) validated += e.validated;
  s.note("candidate_variables", report.entries.size());
  s.note("validated_variables", validated);
  s.finish(log);
}

void stage_synth(const RunConfig& config, std::ostream& log, const fs::path& scenario_path) {
  if (scenario_path.empty()) throw InputError("synth: --scenario is required");
  if (!fs::exists(scenario_path)) throw InputError("missing input " + scenario_path.string());
  const auto scenario = load_scenario(scenario_path);
  Stage s(config, "synth");
  s.inputs.emplace_back(scenario_path.filename().string(), scenario_path);
  const auto data = generate_panel(scenario);
  write_synthetic(config.out_dir, data);
  for (const char* f : {"calendar.csv", "bars.csv", "factors.csv", "fundamentals.csv", "truth.json"}) s.outputs.push_back(f);
  s.note("stocks", data.bars.stocks.size());
  s.note("days", data.bars.calendar.day_count());
  s.note("leaders", data.truth.leaders.size());
  s.finish(log);
}

}  // namespace

std::vector<std::string> stage_names() {
  return {"ingest", "returns", "prep", "fevd", "granger", "regress", "validate", "all", "synth"};
}

void run_stage(const std::string& stage, const RunConfig& config, std::ostream& log, const fs::path& scenario) {
  config.validate();
  if (stage == "ingest") stage_ingest(config, log);
  else if (stage == "returns") stage_returns(config, log);
  else if (stage == "prep") stage_prep(config, log);
  else if (stage == "fevd") stage_fevd(config, log);
  else if (stage == "granger") stage_granger(config, log);
  else if (stage == "regress") stage_regress(config, log);
  else if (stage == "validate") stage_validate(config, log);
  else if (stage == "synth") stage_synth(config, log, scenario);
  else if (stage == "all") {
    for (const char* s : {"ingest", "returns", "prep", "fevd", "granger", "regress", "validate"}) run_stage(s, config, log);
  } else {
    throw InputError("unknown stage '" + stage + "'");
  }
}

}  // namespace comove
