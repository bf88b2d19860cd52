#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace comove {

enum class VariableKind { Numeric, Categorical, Boolean };

const char* to_string(VariableKind kind);

// Missing, numeric, boolean or categorical text.
using Cell = std::variant<std::monostate, double, bool, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }

struct Variable {
  std::string name;
  VariableKind kind = VariableKind::Numeric;
  std::vector<Cell> cells;  // one per stock, aligned with FundamentalsTable::codes
  bool log_transformed = false;

  double missing_fraction() const;
  // Mean of observed numeric cells; NaN when none or not numeric.
  double observed_mean() const;
};

struct FundamentalsTable {
  std::vector<std::string> codes;
  std::vector<Variable> variables;

  const Variable* find(const std::string& name) const;
  std::size_t stock_count() const { return codes.size(); }
};

// Classifies raw text cells of one column: all yes/no/true/false -> Boolean,
// all numeric -> Numeric, anything else -> Categorical (original text kept).
Variable classify_column(std::string name, const std::vector<std::string>& raw);

// Per-variable transform trail, serialized to encoding_report.json.
struct VariableLog {
  std::string name;
  VariableKind kind = VariableKind::Numeric;
  double missing_fraction = 0;
  bool dropped = false;
  std::size_t imputed_cells = 0;
  std::size_t fallback_cells = 0;  // imputed from the global mean / mode
  bool log_transformed = false;
  double mean_abs = 0;
  bool low_support_one_hot = false;
  bool appendix_levels = false;
  std::map<std::string, int> level_codes;
  std::vector<std::string> columns;
};

struct PrepLog {
  std::vector<VariableLog> variables;
  std::size_t raw_variable_count = 0;
  std::string size_variable;

  VariableLog& entry(const Variable& v);
};

struct PrepConfig {
  double missing_threshold = 0.20;
  double log_mean_threshold = 100.0;
  // Multiplied by 1/n: numeric variables nonzero for fewer than
  // support_numerator/n of stocks are one-hot encoded.
  double support_numerator = 4.0;
  std::string size_variable = "total_assets";
  std::size_t max_levels = 16;
};

FundamentalsTable drop_sparse_variables(const FundamentalsTable& table, double threshold = 0.20,
                                        PrepLog* log = nullptr);

// Tercile-mean imputation keyed on size_variable (global mean fallback).
// Categorical and boolean gaps take the tercile mode.
FundamentalsTable impute_by_size(const FundamentalsTable& table, const std::string& size_variable,
                                 PrepLog* log = nullptr);

// sign(x) * ln(1 + |x|) for numeric variables whose mean |x| exceeds threshold.
FundamentalsTable log_transform_large(const FundamentalsTable& table, double threshold = 100.0,
                                      PrepLog* log = nullptr);

struct EncodedColumn {
  std::string name;
  std::string source;
  std::string transform;  // "none", "log", "one_hot"
  std::string level;      // one-hot level text
  int level_code = -1;
};

struct EncodedDesignMatrix {
  std::vector<std::string> codes;
  std::vector<EncodedColumn> columns;
  Eigen::MatrixXd values;  // stocks x columns

  std::vector<std::string> column_names() const;
  // Source variable of every encoded column.
  std::map<std::string, std::string> column_sources() const;
};

EncodedDesignMatrix one_hot_encode(const FundamentalsTable& table, std::size_t n_stocks,
                                   const PrepConfig& config = {}, PrepLog* log = nullptr);

struct PreparedFundamentals {
  FundamentalsTable cleaned;  // after drop, impute and log; before encoding
  EncodedDesignMatrix design;
  PrepLog log;
};

// drop -> impute -> log -> encode
PreparedFundamentals prepare_fundamentals(const FundamentalsTable& table, const PrepConfig& config = {});

// Fixed level codes for the regulatory variables with published one-hot maps.
// Returns nullptr when the variable has no fixed map.
const std::map<std::string, int>* appendix_levels(const std::string& variable);
// Looks a level up in a fixed map; percent strings compare numerically.
std::optional<int> appendix_code(const std::map<std::string, int>& levels, const std::string& value);

void write_design_matrix(const std::filesystem::path& path, const EncodedDesignMatrix& design,
                         const std::string& config_digest = {});
EncodedDesignMatrix read_design_matrix(const std::filesystem::path& path,
                                       const std::filesystem::path& encoding_report);
std::string encoding_report_json(const PrepLog& log, const EncodedDesignMatrix& design,
                                 const std::string& config_digest = {});

}  // namespace comove
