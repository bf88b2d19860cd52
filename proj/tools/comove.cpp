// Command-line front end: one subcommand per pipeline stage.
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "comove/config.hpp"
#include "comove/error.hpp"
#include "comove/pipeline.hpp"

namespace {

std::string flag_name(std::string key) {
  for (auto& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intraday co-movement and leadership analysis"};
  app.set_version_flag("--version", comove::kVersion);
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string scenario_path;
  std::map<std::string, std::string> overrides;
  app.add_option("--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--scenario", scenario_path, "scenario file for `synth`");
  for (const auto& key : comove::RunConfig::keys()) {
    std::string names = flag_name(key);
    if (key == "report_format") names += ",--report";
    app.add_option_function<std::string>(
        names, [&overrides, key](const std::string& v) { overrides[key] = v; }, "overrides " + key);
  }

  const std::map<std::string, std::string> help = {
      {"ingest", "load and validate bars, factors and the calendar"},
      {"returns", "build the excess-return panel"},
      {"prep", "clean and encode fundamentals"},
      {"fevd", "bivariate VAR and FEVD influence per stock"},
      {"granger", "daily pairwise Granger matrices and tallies"},
      {"regress", "stepwise leadership regressions"},
      {"validate", "cross-model validation of determinants"},
      {"all", "run every analysis stage in order"},
      {"synth", "write a synthetic fixture from a scenario file"},
  };
  for (const auto& stage : comove::stage_names()) app.add_subcommand(stage, help.at(stage))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    comove::RunConfig config = config_path.empty() ? comove::RunConfig{} : comove::load_run_config(config_path);
    if (const char* env = std::getenv("COMOVE_WORKERS"); env && *env) config.set("workers", env);
    for (const auto& [k, v] : overrides) config.set(k, v);
    config.validate();
    const std::string stage = app.get_subcommands().front()->get_name();
    comove::run_stage(stage, config, std::cerr, scenario_path);
  } catch (const comove::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const comove::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
