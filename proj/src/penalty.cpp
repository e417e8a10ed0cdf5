#include "deds/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace deds {

namespace {

constexpr double kNever = -std::numeric_limits<double>::infinity();

double pos(double x) { return x > 0.0 ? x : 0.0; }

void require_eps(double eps, const char* where) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument(std::string(where) + ": eps must be positive");
}

}  // namespace

PenaltyTerms penalty_terms(const DedsInstance& inst, const Schedule& sched) {
  require_shape(inst, sched);
  const std::size_t n = inst.units();
  const std::size_t h = inst.horizon();
  PenaltyTerms t{UnitSlotArray(n, h), UnitSlotArray(n, h), UnitSlotArray(n, h),
                 UnitSlotArray(n, h), UnitSlotArray(n, h), UnitSlotArray(n, h - 1),
                 UnitSlotArray(n, h - 1)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = inst.unit(i);
    double level = u.s_initial;
    for (std::size_t k = 0; k < h; ++k) {
      const double g = sched.generation(i, k);
      t.t1(i, k) = u.p_min - g;
      t.t2(i, k) = g - u.p_max;
      if (u.has_storage) {
        level += sched.storage(i, k);
        t.t3(i, k) = u.cap_min - level;
        t.t4(i, k) = level - u.cap_max;
      } else {
        t.t3(i, k) = kNever;
        t.t4(i, k) = kNever;
      }
      t.t5(i, k) = u.injection_min - sched.injection(i, k);
      if (k + 1 < h) {
        const double change = sched.generation(i, k + 1) - g;
        t.t6(i, k) = -u.ramp_down - change;
        t.t7(i, k) = change - u.ramp_up;
      }
    }
  }
  return t;
}

double unit_penalty(const UnitProblem& u, std::span<const double> inj,
                    std::span<const double> sto) {
  const std::size_t h = inj.size();
  double total = 0.0;
  double level = u.s_initial;
  for (std::size_t k = 0; k < h; ++k) {
    const double g = inj[k] + sto[k];
    total += pos(u.p_min - g) + pos(g - u.p_max);
    if (u.has_storage) {
      level += sto[k];
      total += pos(u.cap_min - level) + pos(level - u.cap_max);
    }
    total += pos(u.injection_min - inj[k]);
    if (k + 1 < h) {
      const double change = (inj[k + 1] + sto[k + 1]) - g;
      total += pos(-u.ramp_down - change) + pos(change - u.ramp_up);
    }
  }
  return total;
}

double unit_penalized_cost(const UnitProblem& u, double eps, std::span<const double> inj,
                           std::span<const double> sto) {
  double cost = 0.0;
  for (std::size_t k = 0; k < inj.size(); ++k) cost += u.cost[k].value(inj[k] + sto[k]);
  return cost + unit_penalty(u, inj, sto) / eps;
}

double penalized_cost(const DedsInstance& inst, double eps, const Schedule& sched) {
  require_eps(eps, "penalized_cost");
  require_shape(inst, sched);
  double cost = 0.0;
  double penalty = 0.0;
  for (std::size_t i = 0; i < inst.units(); ++i) {
    const auto inj = sched.injection.row(i);
    const auto sto = sched.storage.row(i);
    for (std::size_t k = 0; k < inst.horizon(); ++k)
      cost += inst.cost(i, k).value(inj[k] + sto[k]);
    penalty += unit_penalty(inst.unit(i), inj, sto);
  }
  return cost + penalty / eps;
}

void unit_subgradient(const UnitProblem& u, double eps, std::span<const double> inj,
                      std::span<const double> sto, std::span<double> zeta1,
                      std::span<double> zeta2) {
  const std::size_t h = inj.size();
  const double inv_eps = 1.0 / eps;

  // Storage chain: the slot-k' entry collects the slopes of every T3/T4 with k >= k'.
  // Slopes are multiples of 1/2, so the running sums below are exact.
  double chain_total = 0.0;
  if (u.has_storage) {
    double level = u.s_initial;
    for (std::size_t k = 0; k < h; ++k) {
      level += sto[k];
      chain_total += hinge_slope(level - u.cap_max) - hinge_slope(u.cap_min - level);
    }
  }

  double level = u.s_initial;
  double chain_before = 0.0;
  for (std::size_t k = 0; k < h; ++k) {
    const double g = inj[k] + sto[k];
    const double smooth = u.cost[k].derivative(g);

    // Box and ramp slopes act on I + S and enter both partial gradients.
    double shared = hinge_slope(g - u.p_max) - hinge_slope(u.p_min - g);
    if (k + 1 < h) {
      const double change = (inj[k + 1] + sto[k + 1]) - g;
      shared += hinge_slope(-u.ramp_down - change) - hinge_slope(change - u.ramp_up);
    }
    if (k > 0) {
      const double change = g - (inj[k - 1] + sto[k - 1]);
      shared += hinge_slope(change - u.ramp_up) - hinge_slope(-u.ramp_down - change);
    }

    zeta1[k] = smooth + inv_eps * (shared - hinge_slope(u.injection_min - inj[k]));

    if (u.has_storage) {
      const double chain = chain_total - chain_before;
      zeta2[k] = smooth + inv_eps * (shared + chain);
      level += sto[k];
      chain_before += hinge_slope(level - u.cap_max) - hinge_slope(u.cap_min - level);
    } else {
      zeta2[k] = 0.0;
    }
  }
}

PenaltySubgradient subgradient(const DedsInstance& inst, double eps, const Schedule& sched) {
  require_eps(eps, "subgradient");
  require_shape(inst, sched);
  PenaltySubgradient sub;
  sub.zeta1 = UnitSlotArray(inst.units(), inst.horizon());
  sub.zeta2 = UnitSlotArray(inst.units(), inst.horizon());
  for (std::size_t i = 0; i < inst.units(); ++i)
    unit_subgradient(inst.unit(i), eps, sched.injection.row(i), sched.storage.row(i),
                     sub.zeta1.row(i), sub.zeta2.row(i));
  return sub;
}

double epsilon_upper_bound(double rho, double f_slater, double f_opt) {
  if (!(rho > 0.0)) throw std::invalid_argument("epsilon_upper_bound: rho must be positive");
  if (!(f_slater > f_opt))
    throw std::invalid_argument(
        "epsilon_upper_bound: the Slater point cost must exceed the optimal cost");
  return rho / (f_slater - f_opt);
}

double inequality_margin(const DedsInstance& inst, const Schedule& sched) {
  const auto t = penalty_terms(inst, sched);
  double worst = kNever;
  for (const UnitSlotArray* family : {&t.t1, &t.t2, &t.t3, &t.t4, &t.t5, &t.t6, &t.t7})
    for (double x : family->flat()) worst = std::max(worst, x);
  return -worst;
}

}  // namespace deds
