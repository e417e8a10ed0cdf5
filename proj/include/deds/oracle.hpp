#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "deds/dynamics.hpp"
#include "deds/graph.hpp"
#include "deds/problem.hpp"
#include "deds/state.hpp"

namespace deds {

struct OracleResult {
  Schedule schedule;
  double optimal_cost = 0.0;  // f^eps at `schedule`
  std::size_t iterations = 0;
  bool converged = false;
  KktResiduals final_residuals;
};

struct OracleOptions {
  std::size_t max_iters = 4000000;
  double tol = 1e-10;                 // relative improvement of the best value per check window
  std::size_t check_every = 200000;
  std::optional<double> step_a;       // default 0.1 * step_scale(inst)
  double step_b = 100.0;
  std::optional<Schedule> initial;    // default: l split evenly, S = 0
};

/// Largest generation span max_i (P^M_i - P^m_i); sets the default step length.
double step_scale(const DedsInstance& inst);

/// x <- x - ((1^T x - l^(k)) / n) 1 for every slot.
void project_onto_load(const DedsInstance& inst, UnitSlotArray& injection);

/// Projected subgradient descent on f^eps over the load equalities, steps a / (b + iter).
/// Returns the best iterate; `converged` is false when max_iters ran out first.
OracleResult solve_centralized(const DedsInstance& inst, double eps, const OracleOptions& options = {});

inline constexpr std::size_t kBruteForceMaxDimension = 4;           // n * h
inline constexpr std::size_t kBruteForceMaxPoints = 200'000'000;

/// Exhaustive grid over S and the free injections; the last unit's injection is eliminated
/// by the load equality. S in [C^m - C^M, C^M - C^m], free injections in [0, l^(k)].
/// Throws std::invalid_argument when n * h or the grid size exceed the caps.
OracleResult brute_force_tiny(const DedsInstance& inst, double eps, double grid_step,
                              ExecPolicy policy = ExecPolicy::serial);

struct SlaterPoint {
  Schedule schedule;
  double margin = 0.0;  // smallest inequality slack on the original instance
  double cost = 0.0;    // f at the point
};

/// Instance with every inequality tightened by rho (injections bounded below by rho).
DedsInstance tightened_instance(const DedsInstance& inst, double rho);

/// Minimizes f over the tightened instance; the returned margin is measured, not assumed.
SlaterPoint strong_slater_point(const DedsInstance& inst, double rho, double eps,
                                const OracleOptions& options = {});

struct DynamicsComparison {
  double oracle_cost = 0.0;    // f at the oracle schedule
  double dynamics_cost = 0.0;  // f at the final simulated schedule
  double cost_gap = 0.0;       // |difference| / max(1, |oracle_cost|)
  double schedule_gap = 0.0;   // max abs over (I, S)
  double slot_total_gap = 0.0;
  double oracle_load_gap = 0.0;
  double dynamics_load_gap = 0.0;
  OracleResult oracle;
  TrajectoryRecord trajectory;
};

/// Runs the oracle and the dynamics from `state0` (zero state if absent) and compares limits.
DynamicsComparison verify_against_dynamics(const DedsInstance& inst, const LaplacianData& lap,
                                           const GainParameters& gains, double dt, double t_final,
                                           std::optional<NetworkState> state0 = std::nullopt,
                                           const OracleOptions& oracle_options = {});

}  // namespace deds
