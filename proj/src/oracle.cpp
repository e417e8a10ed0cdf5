#include "deds/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "deds/kernels.hpp"
#include "deds/penalty.hpp"

namespace deds {

double step_scale(const DedsInstance& inst) {
  double span = 0.0;
  for (std::size_t i = 0; i < inst.units(); ++i)
    span = std::max(span, inst.unit(i).p_max - inst.unit(i).p_min);
  return span > 0.0 ? span : 1.0;
}

void project_onto_load(const DedsInstance& inst, UnitSlotArray& injection) {
  require_shape(injection, inst.units(), inst.horizon(), "injection");
  const auto l = total_load(inst);
  const double n = static_cast<double>(inst.units());
  for (std::size_t k = 0; k < inst.horizon(); ++k) {
    const double shift = (injection.column_sum(k) - l[k]) / n;
    for (std::size_t i = 0; i < inst.units(); ++i) injection(i, k) -= shift;
  }
}

namespace {

Schedule even_split(const DedsInstance& inst) {
  Schedule s(inst.units(), inst.horizon());
  const auto l = total_load(inst);
  for (std::size_t i = 0; i < inst.units(); ++i)
    for (std::size_t k = 0; k < inst.horizon(); ++k)
      s.injection(i, k) = l[k] / static_cast<double>(inst.units());
  return s;
}

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("oracle: eps must be > 0");
}

}  // namespace

OracleResult solve_centralized(const DedsInstance& inst, double eps, const OracleOptions& options) {
  check_eps(eps);
  const std::size_t n = inst.units();
  const std::size_t h = inst.horizon();
  Schedule x = options.initial ? *options.initial : even_split(inst);
  require_shape(inst, x);
  for (std::size_t i = 0; i < n; ++i)
    if (!inst.has_storage(i))
      for (std::size_t k = 0; k < h; ++k) x.storage(i, k) = 0.0;
  project_onto_load(inst, x.injection);

  const double a = options.step_a.value_or(0.1 * step_scale(inst));
  if (!(a > 0.0) || !(options.step_b > 0.0))
    throw std::invalid_argument("oracle: step constants must be positive");
  const std::size_t window = std::max<std::size_t>(options.check_every, 1);

  OracleResult result;
  result.schedule = x;
  result.optimal_cost = penalized_cost(inst, eps, x);
  double window_start = result.optimal_cost;

  UnitSlotArray zeta1(n, h), zeta2(n, h);
  auto fi = x.injection.flat();
  auto fs = x.storage.flat();
  for (std::size_t it = 0; it < options.max_iters; ++it) {
    kernels::serial::subgradient(inst, eps, x.injection, x.storage, zeta1, zeta2);
    const double step = a / (options.step_b + static_cast<double>(it));
    const auto g1 = zeta1.flat();
    const auto g2 = zeta2.flat();
    for (std::size_t e = 0; e < fi.size(); ++e) {
      fi[e] -= step * g1[e];
      fs[e] -= step * g2[e];
    }
    project_onto_load(inst, x.injection);
    const double value = penalized_cost(inst, eps, x);
    if (value < result.optimal_cost) {
      result.optimal_cost = value;
      result.schedule = x;
    }
    result.iterations = it + 1;
    if (result.iterations % window == 0) {
      if (window_start - result.optimal_cost <=
          options.tol * std::max(1.0, std::abs(result.optimal_cost))) {
        result.converged = true;
        break;
      }
      window_start = result.optimal_cost;
    }
  }
  result.final_residuals = kkt_residual(inst, eps, result.schedule);
  return result;
}

namespace {

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;
  std::size_t unit = 0;
  std::size_t slot = 0;
  bool storage = false;

  double at(std::size_t j, double step) const {
    return std::min(lo + static_cast<double>(j) * step, hi);
  }
};

}  // namespace

OracleResult brute_force_tiny(const DedsInstance& inst, double eps, double grid_step,
                              ExecPolicy policy) {
  check_eps(eps);
  const std::size_t n = inst.units();
  const std::size_t h = inst.horizon();
  if (n * h > kBruteForceMaxDimension)
    throw std::invalid_argument("brute_force_tiny: n*h = " + std::to_string(n * h) +
                                " exceeds the cap of " + std::to_string(kBruteForceMaxDimension));
  if (!(grid_step > 0.0)) throw std::invalid_argument("brute_force_tiny: grid_step must be > 0");

  const auto l = total_load(inst);
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = inst.unit(i);
    if (!u.has_storage) continue;
    for (std::size_t k = 0; k < h; ++k)
      axes.push_back({u.cap_min - u.cap_max, u.cap_max - u.cap_min, 1, i, k, true});
  }
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t k = 0; k < h; ++k) axes.push_back({0.0, l[k], 1, i, k, false});

  double total = 1.0;
  for (auto& ax : axes) {
    ax.count = static_cast<std::size_t>(std::ceil((ax.hi - ax.lo) / grid_step - 1e-9)) + 1;
    total *= static_cast<double>(ax.count);
  }
  if (total > static_cast<double>(kBruteForceMaxPoints))
    throw std::invalid_argument("brute_force_tiny: grid has too many points; raise grid_step");
  const auto points = static_cast<long long>(total);

  double best_value = std::numeric_limits<double>::infinity();
  long long best_index = -1;
  const bool par = policy == ExecPolicy::parallel;

#pragma omp parallel if (par)
  {
    Schedule s(n, h);
    double local_value = std::numeric_limits<double>::infinity();
    long long local_index = -1;
#pragma omp for schedule(static)
    for (long long idx = 0; idx < points; ++idx) {
      auto rest = static_cast<std::size_t>(idx);
      for (const auto& ax : axes) {
        const double val = ax.at(rest % ax.count, grid_step);
        rest /= ax.count;
        (ax.storage ? s.storage : s.injection)(ax.unit, ax.slot) = val;
      }
      for (std::size_t k = 0; k < h; ++k) {
        double others = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) others += s.injection(i, k);
        s.injection(n - 1, k) = l[k] - others;
      }
      const double value = penalized_cost(inst, eps, s);
      if (value < local_value) {
        local_value = value;
        local_index = idx;
      }
    }
#pragma omp critical
    {
      if (local_index >= 0 && (local_value < best_value ||
                               (local_value == best_value && local_index < best_index))) {
        best_value = local_value;
        best_index = local_index;
      }
    }
  }

  OracleResult result;
  result.schedule = Schedule(n, h);
  auto rest = static_cast<std::size_t>(best_index);
  for (const auto& ax : axes) {
    (ax.storage ? result.schedule.storage : result.schedule.injection)(ax.unit, ax.slot) =
        ax.at(rest % ax.count, grid_step);
    rest /= ax.count;
  }
  for (std::size_t k = 0; k < h; ++k) {
    double others = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) others += result.schedule.injection(i, k);
    result.schedule.injection(n - 1, k) = l[k] - others;
  }
  result.optimal_cost = best_value;
  result.iterations = static_cast<std::size_t>(points);
  result.converged = true;
  result.final_residuals = kkt_residual(inst, eps, result.schedule);
  return result;
}

DedsInstance tightened_instance(const DedsInstance& inst, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("tightened_instance: rho must be > 0");
  InstanceSpec spec = inst.spec();
  for (std::size_t i = 0; i < spec.units.size(); ++i) {
    auto& u = spec.units[i];
    const std::string tag = "tightened_instance: unit " + std::to_string(i + 1) + ": ";
    u.p_min += rho;
    u.p_max -= rho;
    if (u.p_min > u.p_max) throw std::invalid_argument(tag + "rho exceeds half the generation span");
    u.injection_min += rho;
    if (u.has_storage) {
      u.cap_min += rho;
      u.cap_max -= rho;
      if (u.cap_min > u.cap_max) throw std::invalid_argument(tag + "rho exceeds half the storage span");
    }
    if (spec.horizon > 1) {
      u.ramp_down -= rho;
      u.ramp_up -= rho;
      if (!(u.ramp_down > 0.0 && u.ramp_up > 0.0))
        throw std::invalid_argument(tag + "rho exceeds a ramp limit");
    }
  }
  return DedsInstance(std::move(spec));
}

SlaterPoint strong_slater_point(const DedsInstance& inst, double rho, double eps,
                                const OracleOptions& options) {
  const DedsInstance tight = tightened_instance(inst, rho);
  const OracleResult res = solve_centralized(tight, eps, options);
  SlaterPoint point;
  point.schedule = res.schedule;
  point.margin = inequality_margin(inst, res.schedule);
  point.cost = evaluate_cost(inst, res.schedule);
  return point;
}

DynamicsComparison verify_against_dynamics(const DedsInstance& inst, const LaplacianData& lap,
                                           const GainParameters& gains, double dt, double t_final,
                                           std::optional<NetworkState> state0,
                                           const OracleOptions& oracle_options) {
  DynamicsComparison out;
  out.oracle = solve_centralized(inst, gains.eps, oracle_options);

  IntegrationOptions opt;
  opt.dt = dt;
  opt.t_final = t_final;
  opt.sample_every = std::max(dt, t_final / 200.0);
  opt.keep_states = false;
  const NetworkState start = state0 ? *state0 : NetworkState(inst.units(), inst.horizon());
  out.trajectory = integrate(inst, lap, gains, start, opt);

  const Schedule dyn = out.trajectory.final_state.schedule();
  const Schedule& ora = out.oracle.schedule;
  out.oracle_cost = evaluate_cost(inst, ora);
  out.dynamics_cost = evaluate_cost(inst, dyn);
  out.cost_gap = std::abs(out.dynamics_cost - out.oracle_cost) / std::max(1.0, std::abs(out.oracle_cost));
  out.schedule_gap = std::max(max_abs_difference(dyn.injection, ora.injection),
                              max_abs_difference(dyn.storage, ora.storage));
  const auto l = total_load(inst);
  for (std::size_t k = 0; k < inst.horizon(); ++k) {
    const double td = dyn.injection.column_sum(k);
    const double to = ora.injection.column_sum(k);
    out.slot_total_gap = std::max(out.slot_total_gap, std::abs(td - to));
    out.oracle_load_gap = std::max(out.oracle_load_gap, std::abs(to - l[k]));
    out.dynamics_load_gap = std::max(out.dynamics_load_gap, std::abs(td - l[k]));
  }
  return out;
}

}  // namespace deds
