#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "deds/runner.hpp"
#include "deds/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distributed dynamic economic dispatch with storage: simulator and reference solver"};
  std::string config_path;
  std::string scenario;
  std::string dump;
  std::optional<std::string> mode;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<std::string> out;
  bool emit_full_state = false;
  bool override_gain_check = false;
  bool list = false;

  auto* config_opt = app.add_option("--config", config_path, "JSON scenario file");
  auto* scenario_opt = app.add_option("--scenario", scenario, "builtin scenario name");
  config_opt->excludes(scenario_opt);
  app.add_option("--dump-builtin", dump, "print a builtin scenario as JSON and exit");
  app.add_flag("--list-builtin", list, "list builtin scenario names and exit");
  app.add_option("--mode", mode, "monolithic | agents | oracle | validate")
      ->check(CLI::IsMember({"monolithic", "agents", "oracle", "validate"}));
  app.add_option("--dt", dt, "integration step [s]")->check(CLI::PositiveNumber);
  app.add_option("--t-final", t_final, "simulated horizon [s]")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory");
  app.add_flag("--emit-full-state", emit_full_state, "write every sampled state to state.csv");
  app.add_flag("--override-gain-check", override_gain_check,
               "run even if the gain condition fails (recorded as a warning)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : deds::kExitConfigError;
  }

  try {
    if (list) {
      for (const auto& name : deds::builtin_scenario_names()) std::cout << name << '\n';
      return 0;
    }
    if (!dump.empty()) {
      std::cout << deds::serialize_config(deds::builtin_scenario(dump));
      return 0;
    }
    if (config_path.empty() && scenario.empty()) {
      std::cerr << "error: give --config <file> or --scenario <name>\n";
      return deds::kExitConfigError;
    }
    deds::ScenarioConfig cfg =
        config_path.empty() ? deds::builtin_scenario(scenario) : deds::parse_config(config_path);

    // Command-line values override the file; reparse so the same validation applies.
    if (mode) {
      if (*mode == "monolithic") cfg.run.mode = deds::RunMode::monolithic;
      else if (*mode == "agents") cfg.run.mode = deds::RunMode::agents;
      else if (*mode == "oracle") cfg.run.mode = deds::RunMode::oracle;
      else cfg.run.mode = deds::RunMode::validate;
    }
    if (dt) cfg.run.dt = *dt;
    if (t_final) cfg.run.t_final = *t_final;
    if (out) cfg.run.output_dir = *out;
    if (emit_full_state) cfg.run.emit_full_state = true;
    if (override_gain_check) cfg.run.override_gain_check = true;
    cfg = deds::parse_config_text(deds::serialize_config(cfg));

    const deds::RunReport report = deds::run_scenario(cfg);
    std::cout << report.text;
    if (cfg.run.mode == deds::RunMode::validate) std::cout << report.summary_json;
    return report.exit_code;
  } catch (const deds::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return deds::kExitConfigError;
  }
}
