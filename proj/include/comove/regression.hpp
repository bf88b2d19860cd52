#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace comove {

// Zero-mean, unit-variance (n-1 divisor) columns. Throws InputError on a
// zero-variance column.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& design);

struct ConditionReport {
  double condition_number = 1;
  // Column with the largest |loading| on the right-singular vector of the
  // smallest singular value.
  std::optional<std::size_t> worst_column;
};

ConditionReport condition_number(const Eigen::MatrixXd& standardized);

enum class PruneReason { ZeroVariance, Condition, PValue };
const char* to_string(PruneReason reason);

struct PruneStep {
  std::string column;
  PruneReason reason = PruneReason::Condition;
  double value = 0;  // condition number before removal, or the p-value
};

struct Coefficient {
  std::string name;  // "const" for the intercept
  double estimate = 0;
  double std_error = 0;
  double p_value = 1;
  std::string stars;
};

std::string significance_stars(double p);

struct StepwiseConfig {
  double condition_ceiling = 100.0;
  double p_screen = 0.5;
};

struct StepwiseResult {
  std::string model;
  std::size_t rows = 0;
  std::vector<Coefficient> coefficients;  // intercept first
  std::vector<std::string> surviving;
  double condition_number = 1;
  std::vector<PruneStep> trace;
  std::vector<std::string> warnings;
  double r_squared = 0;

  const Coefficient* find(const std::string& name) const;
};

// Loop: prune by condition number (and until OLS is feasible), fit, drop all
// columns with p above the screen, repeat until nothing is removed. The
// intercept is exempt from both screens.
StepwiseResult stepwise_prune(const Eigen::MatrixXd& design, const std::vector<std::string>& names,
                              const Eigen::VectorXd& y, const std::string& model = {},
                              const StepwiseConfig& config = {});

// 1 / (1 - R^2_j) regressing column j on an intercept and the other columns;
// +infinity under perfect collinearity.
std::vector<double> vif_report(const Eigen::MatrixXd& design);

struct ValidationEntry {
  std::string variable;
  std::vector<std::string> models;   // where some encoded column has p below the threshold
  std::vector<double> coefficients;  // aligned with models (most significant column)
  std::vector<std::string> columns;  // aligned with models
  bool validated = false;
  bool sign_consistent = true;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;  // sorted by variable
  std::vector<std::string> models;       // supplied results, sorted
  bool partial = false;                  // fewer than expected_models results
};

ValidationReport cross_validate(std::span<const StepwiseResult> results,
                                const std::map<std::string, std::string>& column_sources,
                                double p_threshold = 0.1, std::size_t min_models = 2,
                                std::size_t expected_models = 4);

void write_regression_csv(const std::filesystem::path& path, const StepwiseResult& r,
                          const std::string& config_digest = {});
std::string pruning_trace_json(const StepwiseResult& r, const std::vector<double>& vif,
                               const std::string& config_digest = {});
// Reads a regression CSV back; only coefficients are restored.
StepwiseResult read_regression_csv(const std::filesystem::path& path, const std::string& model);
void write_validation_csv(const std::filesystem::path& path, const ValidationReport& report,
                          const std::string& config_digest = {});

}  // namespace comove
