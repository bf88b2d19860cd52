#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "comove/config.hpp"
#include "comove/fundamentals.hpp"
#include "comove/granger.hpp"
#include "comove/influence.hpp"
#include "comove/market_data.hpp"
#include "comove/regression.hpp"
#include "comove/returns.hpp"

namespace comove {

inline constexpr const char* kVersion = "1.0.0";

// Dependent variables of the four leadership regressions, in output order.
inline const std::array<std::string, 4> kModels = {"significant001_bool", "significant001_times_log",
                                                  "sum_fevd", "influence_per_unit_trade"};

struct InfluenceOutcome {
  std::string code;
  std::string status;  // "ok", "unstable" or "error"
  std::string error;
  InfluenceReport report;
};

FevdConfig fevd_config(const RunConfig& config);
PrepConfig prep_config(const RunConfig& config);

// One bivariate FEVD per stock, sorted by code. Numerical failures are kept
// as "error" outcomes.
std::vector<InfluenceOutcome> compute_influence(const ReturnPanel& panel, const RunConfig& config);
// One Granger matrix per calendar day, in date order.
std::vector<GrangerDayOutcome> compute_granger(const ReturnPanel& panel, const RunConfig& config);

struct DependentVariable {
  std::string model;
  std::vector<std::string> codes;
  std::vector<double> values;
};

// FEVD models use stable fits only.
std::vector<DependentVariable> dependent_variables(const std::vector<InfluenceOutcome>& influence,
                                                   const InfluenceTally& tally);

struct RegressionOutput {
  StepwiseResult result;
  std::vector<double> vif;  // surviving columns
};

std::vector<RegressionOutput> run_regressions(const EncodedDesignMatrix& design,
                                              const std::vector<DependentVariable>& dependents,
                                              const RunConfig& config);

ValidationReport validate_models(const std::vector<RegressionOutput>& regressions,
                                 const EncodedDesignMatrix& design, const RunConfig& config);

struct AnalysisResult {
  ReturnBuildResult returns;
  PreparedFundamentals prepared;
  std::vector<InfluenceOutcome> influence;
  std::vector<GrangerDayOutcome> granger;
  InfluenceTally tally;
  std::vector<RegressionOutput> regressions;
  ValidationReport validation;
};

// The whole flow in memory, on already loaded inputs.
AnalysisResult analyze(const BarPanel& bars, const FundamentalsTable& fundamentals, const RunConfig& config);

void write_influence_csv(const std::filesystem::path& path, const std::vector<InfluenceOutcome>& influence,
                         const std::string& config_digest = {});
std::vector<InfluenceOutcome> read_influence_csv(const std::filesystem::path& path);
std::string fevd_report_json(const std::vector<InfluenceOutcome>& influence, const std::string& config_digest = {});

// Stage names accepted by run_stage.
std::vector<std::string> stage_names();

// Runs one CLI stage against files in config.input_dir / config.out_dir.
// `synth` reads the scenario file and writes fixture inputs into out_dir.
// Throws InputError (missing inputs, bad config, upstream stage not run) or
// NumericalError (e.g. no stable VAR fit).
void run_stage(const std::string& stage, const RunConfig& config, std::ostream& log,
               const std::filesystem::path& scenario = {});

}  // namespace comove
