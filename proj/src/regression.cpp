#include "comove/regression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "comove/csv.hpp"
#include "comove/error.hpp"
#include "comove/ols.hpp"

namespace comove {

namespace {

using Index = Eigen::Index;

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = X.col(static_cast<Index>(cols[j]));
  return out;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out(X.rows(), X.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(X.cols()) = X;
  return out;
}

bool zero_variance(const Eigen::VectorXd& c) { return (c.array() == c(0)).all(); }

}  // namespace

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& X) {
  if (X.rows() < 2) throw InputError("standardize_columns: need at least two rows");
  Eigen::MatrixXd Z(X.rows(), X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const Eigen::VectorXd c = X.col(j);
    if (zero_variance(c)) throw InputError("standardize_columns: column " + std::to_string(j) + " has zero variance");
    const Eigen::ArrayXd centered = c.array() - c.mean();
    const double sd = std::sqrt(centered.square().sum() / static_cast<double>(X.rows() - 1));
    Z.col(j) = (centered / sd).matrix();
  }
  return Z;
}

ConditionReport condition_number(const Eigen::MatrixXd& Z) {
  ConditionReport r;
  if (Z.cols() < 2) throw InputError("condition_number: need at least two columns");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smallest = Z.cols() > Z.rows() ? 0.0 : s(s.size() - 1);
  r.condition_number = smallest > 0 ? s(0) / smallest : kInf;
  const Eigen::VectorXd v = svd.matrixV().col(Z.cols() - 1);
  Index worst = 0;
  v.cwiseAbs().maxCoeff(&worst);
  r.worst_column = static_cast<std::size_t>(worst);
  return r;
}

const char* to_string(PruneReason reason) {
  switch (reason) {
    case PruneReason::ZeroVariance: return "zero_variance";
    case PruneReason::Condition: return "condition";
    case PruneReason::PValue: return "p_value";
  }
  return "?";
}

std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

const Coefficient* StepwiseResult::find(const std::string& name) const {
  for (const auto& c : coefficients)
    if (c.name == name) return &c;
  return nullptr;
}

StepwiseResult stepwise_prune(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                              const Eigen::VectorXd& y, const std::string& model, const StepwiseConfig& config) {
  const std::size_t n = static_cast<std::size_t>(X.rows());
  if (names.size() != static_cast<std::size_t>(X.cols())) throw InputError("stepwise_prune: names do not match columns");
  if (static_cast<std::size_t>(y.size()) != n) throw InputError("stepwise_prune: response length mismatch");
  if (n < 8) throw InputError("stepwise_prune: need at least 8 rows, have " + std::to_string(n));
  if (!y.allFinite()) throw InputError("stepwise_prune: response has non-finite values");

  StepwiseResult r;
  r.model = model;
  r.rows = n;
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (zero_variance(X.col(static_cast<Index>(j)))) r.trace.push_back({names[j], PruneReason::ZeroVariance, 0.0});
    else active.push_back(j);
  }

  auto remove_at = [&](std::size_t pos, PruneReason why, double value) {
    r.trace.push_back({names[active[pos]], why, value});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(pos));
  };

  for (;;) {
    bool removed = false;
    while (!active.empty()) {
      const bool infeasible = active.size() >= n - 1;
      if (active.size() < 2) {
        if (!infeasible) break;
        remove_at(0, PruneReason::Condition, kInf);
        removed = true;
        continue;
      }
      const auto cr = condition_number(standardize_columns(select_columns(X, active)));
      if (cr.condition_number < config.condition_ceiling && !infeasible) break;
      remove_at(*cr.worst_column, PruneReason::Condition, cr.condition_number);
      removed = true;
    }
    if (active.empty()) break;

    const auto fit = ols(with_intercept(select_columns(X, active)), y);
    std::vector<std::size_t> drop;
    for (std::size_t j = 0; j < active.size(); ++j)
      if (fit.p_values(static_cast<Index>(j + 1)) > config.p_screen) drop.push_back(j);
    for (auto it = drop.rbegin(); it != drop.rend(); ++it)
      remove_at(*it, PruneReason::PValue, fit.p_values(static_cast<Index>(*it + 1)));
    // keep the trace in column order within one screening pass
    std::reverse(r.trace.end() - static_cast<std::ptrdiff_t>(drop.size()), r.trace.end());
    if (!drop.empty()) removed = true;
    if (!removed) break;
  }

  const Eigen::MatrixXd final_design = with_intercept(select_columns(X, active));
  const auto fit = ols(final_design, y);
  r.r_squared = fit.r_squared;
  r.coefficients.push_back({"const", fit.coefficients(0), fit.std_errors(0), fit.p_values(0),
                            significance_stars(fit.p_values(0))});
  for (std::size_t j = 0; j < active.size(); ++j) {
    const auto k = static_cast<Index>(j + 1);
    r.coefficients.push_back({names[active[j]], fit.coefficients(k), fit.std_errors(k), fit.p_values(k),
                              significance_stars(fit.p_values(k))});
    r.surviving.push_back(names[active[j]]);
  }
  r.condition_number =
      active.size() >= 2 ? condition_number(standardize_columns(select_columns(X, active))).condition_number : 1.0;
  if (active.empty()) r.warnings.push_back("all columns eliminated; intercept-only model");
  return r;
}

std::vector<double> vif_report(const Eigen::MatrixXd& X) {
  const Index m = X.cols();
  if (m < 2) throw InputError("vif_report: need at least two columns");
  if (X.rows() <= m) throw InputError("vif_report: need more rows than columns");
  std::vector<double> out(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    Eigen::MatrixXd others(X.rows(), m);
    others.col(0).setOnes();
    Index c = 1;
    for (Index k = 0; k < m; ++k)
      if (k != j) others.col(c++) = X.col(k);
    const Eigen::VectorXd target = X.col(j);
    const double tss = (target.array() - target.mean()).square().sum();
    if (tss <= 0) {
      out[static_cast<std::size_t>(j)] = kInf;
      continue;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(others);
    qr.setThreshold(1e-10);
    const double rss = (target - others * qr.solve(target)).squaredNorm();
    const double r2 = 1.0 - rss / tss;
    out[static_cast<std::size_t>(j)] = r2 >= 1.0 - 1e-12 ? kInf : 1.0 / (1.0 - r2);
  }
  return out;
}

ValidationReport cross_validate(std::span<const StepwiseResult> results,
                                const std::map<std::string, std::string>& column_sources, double p_threshold,
                                std::size_t min_models, std::size_t expected_models) {
  ValidationReport report;
  for (const auto& r : results) report.models.push_back(r.model);
  std::sort(report.models.begin(), report.models.end());
  report.partial = results.size() < expected_models;

  struct Hit {
    std::string column;
    double coefficient = 0;
    double p = 1;
  };
  // variable -> model -> most significant column
  std::map<std::string, std::map<std::string, Hit>> hits;
  for (const auto& r : results) {
    for (const auto& c : r.coefficients) {
      if (c.name == "const" || !(c.p_value < p_threshold)) continue;
      auto src = column_sources.find(c.name);
      const std::string var = src != column_sources.end() ? src->second : c.name;
      auto& h = hits[var];
      auto it = h.find(r.model);
      if (it == h.end() || c.p_value < it->second.p || (c.p_value == it->second.p && c.name < it->second.column))
        h[r.model] = Hit{c.name, c.estimate, c.p_value};
    }
  }
  for (const auto& [var, per_model] : hits) {
    ValidationEntry e;
    e.variable = var;
    bool pos = false, neg = false;
    for (const auto& [model, hit] : per_model) {
      e.models.push_back(model);
      e.coefficients.push_back(hit.coefficient);
      e.columns.push_back(hit.column);
      (hit.coefficient >= 0 ? pos : neg) = true;
    }
    e.validated = e.models.size() >= min_models;
    e.sign_consistent = !(pos && neg);
    report.entries.push_back(std::move(e));
  }
  return report;
}

void write_regression_csv(const std::filesystem::path& path, const StepwiseResult& r, const std::string& config_digest) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  if (!config_digest.empty()) out << "# config_digest=" << config_digest << '\n';
  out << "variable,coefficient,std_err,p_value,stars\n";
  for (const auto& c : r.coefficients)
    csv::write_record(out, {c.name, csv::format_double(c.estimate), csv::format_double(c.std_error),
                            csv::format_double(c.p_value), c.stars});
}

std::string pruning_trace_json(const StepwiseResult& r, const std::vector<double>& vif, const std::string& config_digest) {
  nlohmann::ordered_json j;
  if (!config_digest.empty()) j["config_digest"] = config_digest;
  j["model"] = r.model;
  j["rows"] = r.rows;
  j["final_condition_number"] = r.condition_number;
  j["r_squared"] = r.r_squared;
  j["surviving"] = r.surviving;
  auto& steps = j["removed"] = nlohmann::ordered_json::array();
  for (const auto& s : r.trace) {
    nlohmann::ordered_json e{{"column", s.column}, {"reason", to_string(s.reason)}};
    if (std::isfinite(s.value)) e["value"] = s.value;
    else e["value"] = "inf";
    steps.push_back(std::move(e));
  }
  auto& v = j["vif"] = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < vif.size() && i < r.surviving.size(); ++i) {
    if (std::isfinite(vif[i])) v[r.surviving[i]] = vif[i];
    else v[r.surviving[i]] = "inf";
  }
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

StepwiseResult read_regression_csv(const std::filesystem::path& path, const std::string& model) {
  const auto table = csv::read(path);
  const std::size_t c_var = table.column("variable"), c_coef = table.column("coefficient"),
                    c_se = table.column("std_err"), c_p = table.column("p_value"), c_stars = table.column("stars");
  StepwiseResult r;
  r.model = model;
  for (const auto& row : table.rows) {
    Coefficient c;
    c.name = row.fields[c_var];
    if (!csv::parse_double(row.fields[c_coef], c.estimate) || !csv::parse_double(row.fields[c_se], c.std_error) ||
        !csv::parse_double(row.fields[c_p], c.p_value))
      throw InputError(path.string() + ":" + std::to_string(row.line) + ": malformed regression row");
    c.stars = row.fields[c_stars];
    if (c.name != "const") r.surviving.push_back(c.name);
    r.coefficients.push_back(std::move(c));
  }
  return r;
}

void write_validation_csv(const std::filesystem::path& path, const ValidationReport& report,
                          const std::string& config_digest) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  if (!config_digest.empty()) out << "# config_digest=" << config_digest << '\n';
  if (report.partial) out << "# partial: fewer than four model results supplied\n";
  out << "variable,n_models,models,columns,coefficients,validated,sign_consistent\n";
  for (const auto& e : report.entries) {
    std::string models, cols, coefs;
    for (std::size_t i = 0; i < e.models.size(); ++i) {
      if (i) {
        models += ';';
        cols += ';';
        coefs += ';';
      }
      models += e.models[i];
      cols += e.columns[i];
      coefs += csv::format_double(e.coefficients[i]);
    }
    csv::write_record(out, {e.variable, std::to_string(e.models.size()), models, cols, coefs,
                            e.validated ? "1" : "0", e.sign_consistent ? "1" : "0"});
  }
}

}  // namespace comove
