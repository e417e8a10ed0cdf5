#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deds/dynamics.hpp"
#include "deds/graph.hpp"
#include "deds/problem.hpp"
#include "deds/state.hpp"

namespace deds {

/// Positioned configuration error; `path` is the dotted key path, e.g. "gains.eps".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class RunMode { monolithic, agents, oracle, validate };

struct GraphSection {
  std::size_t vertices = 0;
  std::vector<Edge> edges;  // 1-based ids

  friend bool operator==(const GraphSection&, const GraphSection&) = default;
};

/// Either a per-slot p_min / p_max pattern for I(0) or explicit arrays; absent parts are zero.
struct InitialSpec {
  std::optional<std::vector<BoundChoice>> injection_pattern;
  std::optional<UnitSlotArray> injection;
  std::optional<UnitSlotArray> storage;
  std::optional<UnitSlotArray> z;
  std::optional<UnitSlotArray> v;

  friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

struct RunSection {
  RunMode mode = RunMode::monolithic;
  StepMethod method = StepMethod::euler;
  ExecPolicy policy = ExecPolicy::serial;
  double dt = 1e-3;
  double t_final = 10.0;
  double sample_every = 0.1;
  std::string output_dir = "deds-out";
  InitialSpec initial;
  bool anti_chatter = true;
  bool override_gain_check = false;
  bool emit_full_state = false;
  bool use_stop_rule = true;
  double stop_tolerance = 1e-4;
  std::size_t stop_window = 100;
  std::optional<double> slater_rho;  // margin used for the eps bound check
  std::size_t oracle_max_iters = 4000000;

  friend bool operator==(const RunSection&, const RunSection&) = default;
};

struct ScenarioConfig {
  std::string name;
  GraphSection graph;
  InstanceSpec instance;  // anchor_unit is 0-based here, 1-based in the file
  GainParameters gains;
  RunSection run;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Reads and validates a JSON config. Throws ConfigError.
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

/// Pretty JSON accepted by parse_config_text.
std::string serialize_config(const ScenarioConfig& cfg);

std::vector<std::string> builtin_scenario_names();
/// Throws ConfigError for unknown names.
ScenarioConfig builtin_scenario(const std::string& name);

/// Initial state described by `cfg.run.initial`.
NetworkState initial_state(const ScenarioConfig& cfg, const DedsInstance& inst);

}  // namespace deds
