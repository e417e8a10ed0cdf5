#pragma once

#include <string>
#include <vector>

#include "deds/oracle.hpp"
#include "deds/scenario.hpp"

namespace deds {

enum ExitCode : int {
  kExitOk = 0,
  kExitHypothesisRejected = 2,
  kExitDiverged = 3,
  kExitConfigError = 4,
};

struct EpsilonBoundCheck {
  double rho = 0.0;            // requested tightening
  double slater_margin = 0.0;  // measured slack of the interior point
  double f_slater = 0.0;
  double f_opt = 0.0;
  double bound = 0.0;          // slater_margin / (f_slater - f_opt)
  double eps = 0.0;
  bool eps_below_bound = false;
};

/// Builds a strong-Slater point with margin about rho and evaluates the eps upper bound.
EpsilonBoundCheck check_epsilon_bound(const DedsInstance& inst, double eps, double rho,
                                      const OracleOptions& options = {});

struct RunReport {
  int exit_code = kExitOk;
  std::string summary_json;        // also written to <output_dir>/summary.json
  std::string text;                // short human-readable report
  std::vector<std::string> files;  // artifacts written
};

/// Runs the configured mode and writes its artifacts. Never throws for rejected
/// hypotheses, divergence or invalid input; those map to exit codes.
RunReport run_scenario(const ScenarioConfig& cfg);

}  // namespace deds
