#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "deds/graph.hpp"
#include "deds/kernels.hpp"
#include "deds/problem.hpp"
#include "deds/state.hpp"

namespace deds {

struct GainCheck {
  bool ok = false;
  double margin = 0.0;  // lambda2 - (nu1/(beta nu2 lambda2) + nu2^2 lambda_max/(2 alpha))
};

/// Gain condition on the spectral data. A single unit has no coupling and always passes.
/// Throws std::invalid_argument when the digraph is not strongly connected and balanced.
GainCheck validate_gains(const LaplacianData& lap, const GainParameters& p);

enum class StepMethod { euler, rk4 };

NetworkState vector_field(const DedsInstance& inst, const LaplacianData& lap,
                          const GainParameters& p, const NetworkState& state,
                          ExecPolicy policy = ExecPolicy::serial);

/// One explicit step with the canonical selection frozen per stage. Throws DivergenceError
/// if the new state is not finite.
NetworkState step(const DedsInstance& inst, const LaplacianData& lap, const GainParameters& p,
                  const NetworkState& state, double dt, StepMethod method = StepMethod::euler,
                  ExecPolicy policy = ExecPolicy::serial);

/// Stepper that keeps the per-entry history needed by the anti-chatter guard.
class Stepper {
 public:
  Stepper(const DedsInstance& inst, const LaplacianData& lap, const GainParameters& p,
          StepMethod method, ExecPolicy policy, bool anti_chatter);

  void advance(NetworkState& state, double dt);
  std::size_t chatter_events() const { return chatter_events_; }

 private:
  const DedsInstance& inst_;
  const LaplacianData& lap_;
  GainParameters gains_;
  StepMethod method_;
  ExecPolicy policy_;
  bool anti_chatter_;
  kernels::FieldWorkspace ws_;
  NetworkState deriv_;
  UnitSlotArray previous_storage_rate_;
  std::size_t chatter_events_ = 0;
};

std::vector<double> mismatch(const DedsInstance& inst, const NetworkState& state);

/// Solution of x'' = -alpha x' - w x with x(0) = xi0, x'(0) = xidot0, w = nu1 * nu2.
double mismatch_closed_form(double xi0, double xidot0, double alpha, double nu1nu2, double t);

/// D(I, S, z, v) = (I, S, z, v + alpha z - nu2 (b - I)), b the per-unit load vector.
NetworkState transform_coordinates(const DedsInstance& inst, const GainParameters& p,
                                   const NetworkState& state);

double lyapunov_value(const DedsInstance& inst, const GainParameters& p,
                      const NetworkState& state);

/// Largest |1^T v^(k)| over slots.
double conservation_residual(const NetworkState& state);

struct TrajectorySample {
  double time = 0.0;
  std::vector<double> slot_totals;  // 1^T I^(k)
  std::vector<double> mismatch;     // xi_k
  double cost = 0.0;
  double penalized_cost = 0.0;
  double lyapunov = 0.0;
  double max_abs_mismatch = 0.0;
  double conservation = 0.0;
  double v_norm = 0.0;  // Euclidean norm of v
};

enum class StopReason { t_final, converged };

struct TrajectoryRecord {
  std::vector<TrajectorySample> samples;
  std::vector<NetworkState> states;  // one per sample when kept
  NetworkState final_state;
  KktResiduals final_residuals;
  double final_field_residual = 0.0;
  StopReason stop_reason = StopReason::t_final;
  std::size_t steps = 0;
  std::size_t chatter_events = 0;
  std::vector<std::string> warnings;
};

struct IntegrationOptions {
  double dt = 1e-3;
  double t_final = 10.0;
  double sample_every = 0.1;  // time between samples
  StepMethod method = StepMethod::euler;
  ExecPolicy policy = ExecPolicy::serial;
  bool anti_chatter = true;
  bool override_gain_check = false;
  bool keep_states = true;
  bool use_stop_rule = true;
  double stop_tolerance = 1e-4;
  std::size_t stop_window = 100;  // consecutive samples
  std::optional<double> eps_bound;  // verified upper bound on eps, if known
};

/// Rejects v(0) with nonzero column sums and failing gains (HypothesisRejected), and
/// malformed options (std::invalid_argument).
void check_hypotheses(const DedsInstance& inst, const LaplacianData& lap, const GainParameters& p,
                      const NetworkState& state0, const IntegrationOptions& opt,
                      std::vector<std::string>& warnings);

TrajectoryRecord integrate(const DedsInstance& inst, const LaplacianData& lap,
                           const GainParameters& p, const NetworkState& state0,
                           const IntegrationOptions& opt);

/// Turns observed states into trajectory samples and applies the stop rule. Shared by the
/// monolithic integrator and the agent harness; it sees global state, the agents never do.
class TrajectoryRecorder {
 public:
  TrajectoryRecorder(const DedsInstance& inst, const LaplacianData& lap, const GainParameters& p,
                     const IntegrationOptions& opt);

  /// Records a sample; returns true once the stop rule has fired.
  bool observe(double time, const NetworkState& state);

  TrajectoryRecord finish(const NetworkState& final_state, std::size_t steps,
                          std::size_t chatter_events, std::vector<std::string> warnings);

 private:
  const DedsInstance& inst_;
  const LaplacianData& lap_;
  GainParameters gains_;
  IntegrationOptions opt_;
  std::vector<double> load_;
  TrajectoryRecord record_;
  std::size_t quiet_samples_ = 0;
  bool converged_ = false;
};

struct StepSchedule {
  std::size_t total_steps = 0;
  std::size_t sample_stride = 1;
};

StepSchedule make_step_schedule(double dt, double t_final, double sample_every);

/// Canonical initial state: I(0) per slot from a pattern of p_max / p_min, others zero.
enum class BoundChoice { p_min, p_max };
NetworkState bound_pattern_state(const DedsInstance& inst, const std::vector<BoundChoice>& per_slot);

}  // namespace deds
