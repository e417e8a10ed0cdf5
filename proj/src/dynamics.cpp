#include "deds/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "deds/penalty.hpp"

namespace deds {

double max_abs_difference(const NetworkState& a, const NetworkState& b) {
  return std::max({max_abs_difference(a.injection, b.injection),
                   max_abs_difference(a.storage, b.storage), max_abs_difference(a.z, b.z),
                   max_abs_difference(a.v, b.v)});
}

GainCheck validate_gains(const LaplacianData& lap, const GainParameters& p) {
  p.validate();
  if (lap.size() == 1) return {true, std::numeric_limits<double>::infinity()};
  if (!lap.strongly_connected || !lap.weight_balanced || !(lap.lambda2_sym > 0.0))
    throw std::invalid_argument(
        "gain condition needs a strongly connected, weight-balanced digraph");
  const double l2 = lap.lambda2_sym;
  const double lhs = p.nu1 / (p.beta * p.nu2 * l2) + p.nu2 * p.nu2 * lap.lambda_max_LtL / (2.0 * p.alpha);
  const double margin = l2 - lhs;
  return {margin > 0.0, margin};
}

NetworkState vector_field(const DedsInstance& inst, const LaplacianData& lap,
                          const GainParameters& p, const NetworkState& state, ExecPolicy policy) {
  kernels::FieldWorkspace ws;
  NetworkState out;
  kernels::vector_field(policy, inst, lap, p, state, ws, out);
  return out;
}

Stepper::Stepper(const DedsInstance& inst, const LaplacianData& lap, const GainParameters& p,
                 StepMethod method, ExecPolicy policy, bool anti_chatter)
    : inst_(inst),
      lap_(lap),
      gains_(p),
      method_(method),
      policy_(policy),
      anti_chatter_(anti_chatter && method == StepMethod::euler),
      previous_storage_rate_(inst.units(), inst.horizon()) {
  if (lap.size() != inst.units())
    throw ShapeMismatch("Laplacian size does not match the unit count");
}

namespace {

void axpy(UnitSlotArray& y, double a, const UnitSlotArray& x) {
  auto fy = y.flat();
  auto fx = x.flat();
  for (std::size_t k = 0; k < fy.size(); ++k) fy[k] += a * fx[k];
}

void axpy(NetworkState& y, double a, const NetworkState& x) {
  axpy(y.injection, a, x.injection);
  axpy(y.storage, a, x.storage);
  axpy(y.z, a, x.z);
  axpy(y.v, a, x.v);
}

}  // namespace

void Stepper::advance(NetworkState& state, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (method_ == StepMethod::euler) {
    kernels::vector_field(policy_, inst_, lap_, gains_, state, ws_, deriv_);
    axpy(state.injection, dt, deriv_.injection);
    auto s = state.storage.flat();
    auto ds = deriv_.storage.flat();
    auto prev = previous_storage_rate_.flat();
    for (std::size_t k = 0; k < s.size(); ++k)
      kernels::rules::storage_euler(s[k], ds[k], dt, prev[k], anti_chatter_, chatter_events_);
    axpy(state.z, dt, deriv_.z);
    axpy(state.v, dt, deriv_.v);
  } else {
    NetworkState k1, k2, k3, k4;
    kernels::vector_field(policy_, inst_, lap_, gains_, state, ws_, k1);
    NetworkState tmp = state;
    axpy(tmp, 0.5 * dt, k1);
    kernels::vector_field(policy_, inst_, lap_, gains_, tmp, ws_, k2);
    tmp = state;
    axpy(tmp, 0.5 * dt, k2);
    kernels::vector_field(policy_, inst_, lap_, gains_, tmp, ws_, k3);
    tmp = state;
    axpy(tmp, dt, k3);
    kernels::vector_field(policy_, inst_, lap_, gains_, tmp, ws_, k4);
    axpy(state, dt / 6.0, k1);
    axpy(state, dt / 3.0, k2);
    axpy(state, dt / 3.0, k3);
    axpy(state, dt / 6.0, k4);
  }
  if (!state.all_finite())
    throw DivergenceError("non-finite state after step; dt is too large for the penalty stiffness");
}

NetworkState step(const DedsInstance& inst, const LaplacianData& lap, const GainParameters& p,
                  const NetworkState& state, double dt, StepMethod method, ExecPolicy policy) {
  Stepper stepper(inst, lap, p, method, policy, false);
  NetworkState next = state;
  stepper.advance(next, dt);
  return next;
}

std::vector<double> mismatch(const DedsInstance& inst, const NetworkState& state) {
  require_shape(inst, state);
  const auto l = total_load(inst);
  std::vector<double> xi(inst.horizon());
  for (std::size_t k = 0; k < xi.size(); ++k) xi[k] = state.injection.column_sum(k) - l[k];
  return xi;
}

double mismatch_closed_form(double xi0, double xidot0, double alpha, double w, double t) {
  const double disc = alpha * alpha - 4.0 * w;
  const double tol = 1e-12 * alpha * alpha;
  if (disc > tol) {
    const double root = std::sqrt(disc);
    const double r1 = 0.5 * (-alpha + root);
    const double r2 = 0.5 * (-alpha - root);
    const double a1 = (xidot0 - r2 * xi0) / (r1 - r2);
    const double a2 = xi0 - a1;
    return a1 * std::exp(r1 * t) + a2 * std::exp(r2 * t);
  }
  if (disc < -tol) {
    const double sigma = -0.5 * alpha;
    const double omega = 0.5 * std::sqrt(-disc);
    return std::exp(sigma * t) *
           (xi0 * std::cos(omega * t) + (xidot0 - sigma * xi0) / omega * std::sin(omega * t));
  }
  const double r = -0.5 * alpha;
  return (xi0 + (xidot0 - r * xi0) * t) * std::exp(r * t);
}

NetworkState transform_coordinates(const DedsInstance& inst, const GainParameters& p,
                                   const NetworkState& state) {
  require_shape(inst, state);
  NetworkState out = state;
  for (std::size_t i = 0; i < inst.units(); ++i)
    for (std::size_t k = 0; k < inst.horizon(); ++k)
      out.v(i, k) = state.v(i, k) + p.alpha * state.z(i, k) -
                    p.nu2 * (inst.local_load(i, k) - state.injection(i, k));
  return out;
}

namespace {

double squared_norm(const UnitSlotArray& a) {
  double s = 0.0;
  for (double x : a.flat()) s += x * x;
  return s;
}

}  // namespace

double lyapunov_value(const DedsInstance& inst, const GainParameters& p,
                      const NetworkState& state) {
  const NetworkState w = transform_coordinates(inst, p, state);
  return penalized_cost(inst, p.eps, state.schedule()) +
         0.5 * (p.nu1 * p.nu2 * squared_norm(w.z) + squared_norm(w.v));
}

double conservation_residual(const NetworkState& state) {
  double worst = 0.0;
  for (std::size_t k = 0; k < state.slots(); ++k)
    worst = std::max(worst, std::abs(state.v.column_sum(k)));
  return worst;
}

StepSchedule make_step_schedule(double dt, double t_final, double sample_every) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_final >= 0.0) || !std::isfinite(t_final))
    throw std::invalid_argument("t_final must be nonnegative");
  if (!(sample_every > 0.0)) throw std::invalid_argument("sample_every must be positive");
  StepSchedule s;
  s.total_steps = static_cast<std::size_t>(std::llround(t_final / dt));
  s.sample_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sample_every / dt)));
  return s;
}

void check_hypotheses(const DedsInstance& inst, const LaplacianData& lap, const GainParameters& p,
                      const NetworkState& state0, const IntegrationOptions& opt,
                      std::vector<std::string>& warnings) {
  require_shape(inst, state0);
  p.validate();
  if (lap.size() != inst.units()) throw ShapeMismatch("Laplacian size does not match unit count");
  if (!state0.all_finite()) throw std::invalid_argument("initial state must be finite");
  const double v_col = conservation_residual(state0);
  if (v_col > 1e-9)
    throw HypothesisRejected("v(0) column sums must vanish (largest |1^T v^(k)| = " +
                             std::to_string(v_col) + ")");
  GainCheck gains{};
  try {
    gains = validate_gains(lap, p);
  } catch (const std::invalid_argument& e) {
    if (!opt.override_gain_check) throw HypothesisRejected(e.what());
    warnings.emplace_back(std::string("gain check skipped: ") + e.what());
    gains.ok = true;
  }
  if (!gains.ok) {
    const std::string msg = "gain condition fails (margin " + std::to_string(gains.margin) + ")";
    if (!opt.override_gain_check) throw HypothesisRejected(msg);
    warnings.push_back(msg + ", overridden");
  }
  if (!opt.eps_bound)
    warnings.emplace_back("eps admissibility bound not verified for this run");
  else if (!(p.eps < *opt.eps_bound))
    warnings.push_back("eps = " + std::to_string(p.eps) + " is not below the computed bound " +
                       std::to_string(*opt.eps_bound));
}

TrajectoryRecorder::TrajectoryRecorder(const DedsInstance& inst, const LaplacianData& lap,
                                       const GainParameters& p, const IntegrationOptions& opt)
    : inst_(inst), lap_(lap), gains_(p), opt_(opt), load_(total_load(inst)) {}

bool TrajectoryRecorder::observe(double time, const NetworkState& state) {
  TrajectorySample s;
  s.time = time;
  const std::size_t h = inst_.horizon();
  s.slot_totals.resize(h);
  s.mismatch.resize(h);
  for (std::size_t k = 0; k < h; ++k) {
    s.slot_totals[k] = state.injection.column_sum(k);
    s.mismatch[k] = s.slot_totals[k] - load_[k];
    s.max_abs_mismatch = std::max(s.max_abs_mismatch, std::abs(s.mismatch[k]));
  }
  const Schedule sched = state.schedule();
  s.cost = evaluate_cost(inst_, sched);
  s.penalized_cost = penalized_cost(inst_, gains_.eps, sched);
  s.lyapunov = lyapunov_value(inst_, gains_, state);
  s.conservation = conservation_residual(state);
  s.v_norm = std::sqrt(squared_norm(state.v));
  record_.samples.push_back(std::move(s));
  if (opt_.keep_states) record_.states.push_back(state);

  if (opt_.use_stop_rule && !converged_) {
    const auto kkt = kkt_residual(inst_, gains_.eps, sched);
    const auto field = vector_field(inst_, lap_, gains_, state);
    const double metric = std::max({kkt.max(), state.z.max_abs(), field.max_abs()});
    quiet_samples_ = metric < opt_.stop_tolerance ? quiet_samples_ + 1 : 0;
    converged_ = quiet_samples_ >= opt_.stop_window;
  }
  return converged_;
}

TrajectoryRecord TrajectoryRecorder::finish(const NetworkState& final_state, std::size_t steps,
                                            std::size_t chatter_events,
                                            std::vector<std::string> warnings) {
  record_.final_state = final_state;
  record_.final_residuals = kkt_residual(inst_, gains_.eps, final_state.schedule());
  record_.final_field_residual = vector_field(inst_, lap_, gains_, final_state).max_abs();
  record_.stop_reason = converged_ ? StopReason::converged : StopReason::t_final;
  record_.steps = steps;
  record_.chatter_events = chatter_events;
  record_.warnings = std::move(warnings);
  return std::move(record_);
}

TrajectoryRecord integrate(const DedsInstance& inst, const LaplacianData& lap,
                           const GainParameters& p, const NetworkState& state0,
                           const IntegrationOptions& opt) {
  std::vector<std::string> warnings;
  check_hypotheses(inst, lap, p, state0, opt, warnings);
  const auto sched = make_step_schedule(opt.dt, opt.t_final, opt.sample_every);

  Stepper stepper(inst, lap, p, opt.method, opt.policy, opt.anti_chatter);
  TrajectoryRecorder recorder(inst, lap, p, opt);
  NetworkState state = state0;
  bool stop = recorder.observe(0.0, state);
  std::size_t n = 0;
  while (!stop && n < sched.total_steps) {
    stepper.advance(state, opt.dt);
    ++n;
    if (n % sched.sample_stride == 0 || n == sched.total_steps)
      stop = recorder.observe(static_cast<double>(n) * opt.dt, state);
  }
  return recorder.finish(state, n, stepper.chatter_events(), std::move(warnings));
}

NetworkState bound_pattern_state(const DedsInstance& inst,
                                 const std::vector<BoundChoice>& per_slot) {
  if (per_slot.size() != inst.horizon())
    throw std::invalid_argument("initial-condition pattern needs one entry per slot");
  NetworkState s(inst.units(), inst.horizon());
  for (std::size_t i = 0; i < inst.units(); ++i)
    for (std::size_t k = 0; k < inst.horizon(); ++k)
      s.injection(i, k) =
          per_slot[k] == BoundChoice::p_max ? inst.unit(i).p_max : inst.unit(i).p_min;
  return s;
}

}  // namespace deds
