#include "deds/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "deds/penalty.hpp"

namespace deds {

double max_abs_difference(const UnitSlotArray& a, const UnitSlotArray& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("max_abs_difference: shape mismatch");
  double m = 0.0;
  auto fa = a.flat();
  auto fb = b.flat();
  for (std::size_t k = 0; k < fa.size(); ++k) m = std::max(m, std::abs(fa[k] - fb[k]));
  return m;
}

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("instance: " + what);
}

double pos(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

DedsInstance::DedsInstance(InstanceSpec spec) : spec_(std::move(spec)) {
  const std::size_t n = spec_.units.size();
  const std::size_t h = spec_.horizon;
  check(n >= 1, "need at least one unit");
  check(h >= 1, "horizon must be at least one slot");
  check(spec_.external_load.size() == h, "external_load must have one entry per slot");
  check(spec_.bus_loads.units() == n && spec_.bus_loads.slots() == h,
        "bus_loads must be units x slots");
  check(spec_.anchor_unit < n, "anchor unit out of range");
  for (double x : spec_.external_load) check(x >= 0.0 && std::isfinite(x), "loads must be >= 0");
  for (double x : spec_.bus_loads.flat()) check(x >= 0.0 && std::isfinite(x), "loads must be >= 0");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = spec_.units[i];
    const std::string tag = "unit " + std::to_string(i + 1) + ": ";
    check(u.cost.size() == h, tag + "need one cost per slot");
    for (const auto& c : u.cost)
      check(c.c >= 0.0 && std::isfinite(c.a) && std::isfinite(c.b) && std::isfinite(c.c),
            tag + "cost must be convex (c >= 0) and finite");
    check(u.p_min <= u.p_max, tag + "p_min must not exceed p_max");
    check(u.ramp_down > 0.0 && u.ramp_up > 0.0, tag + "ramps must be positive");
    if (u.has_storage) {
      check(u.cap_min <= u.cap_max, tag + "cap_min must not exceed cap_max");
      check(std::isfinite(u.s_initial), tag + "s_initial must be finite");
    }
  }
}

void require_shape(const DedsInstance& inst, const Schedule& sched) {
  require_shape(sched.injection, inst.units(), inst.horizon(), "schedule injection");
  require_shape(sched.storage, inst.units(), inst.horizon(), "schedule storage");
}

double FeasibilityReport::worst() const {
  return std::max({load, box, storage, injection, ramp});
}

double KktResiduals::max() const { return std::max({load, storage, injection_consensus}); }

std::vector<double> total_load(const DedsInstance& inst) {
  std::vector<double> l(inst.horizon());
  for (std::size_t k = 0; k < inst.horizon(); ++k)
    l[k] = inst.external_load()[k] + inst.bus_loads().column_sum(k);
  return l;
}

double evaluate_cost(const DedsInstance& inst, const Schedule& sched) {
  require_shape(inst, sched);
  double total = 0.0;
  for (std::size_t i = 0; i < inst.units(); ++i)
    for (std::size_t k = 0; k < inst.horizon(); ++k)
      total += inst.cost(i, k).value(sched.generation(i, k));
  return total;
}

FeasibilityReport check_feasibility(const DedsInstance& inst, const Schedule& sched, double tol) {
  require_shape(inst, sched);
  if (!(tol >= 0.0)) throw std::invalid_argument("feasibility tolerance must be >= 0");
  const std::size_t n = inst.units();
  const std::size_t h = inst.horizon();
  const auto l = total_load(inst);
  FeasibilityReport r;
  r.tol = tol;
  for (std::size_t k = 0; k < h; ++k)
    r.load = std::max(r.load, std::abs(sched.injection.column_sum(k) - l[k]));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = inst.unit(i);
    double level = u.s_initial;
    for (std::size_t k = 0; k < h; ++k) {
      const double g = sched.generation(i, k);
      r.box = std::max({r.box, pos(u.p_min - g), pos(g - u.p_max)});
      r.injection = std::max(r.injection, pos(-sched.injection(i, k)));
      if (u.has_storage) {
        level += sched.storage(i, k);
        r.storage = std::max({r.storage, pos(u.cap_min - level), pos(level - u.cap_max)});
      } else {
        r.storage = std::max(r.storage, std::abs(sched.storage(i, k)));
      }
      if (k + 1 < h) {
        const double change = sched.generation(i, k + 1) - g;
        r.ramp = std::max({r.ramp, pos(-u.ramp_down - change), pos(change - u.ramp_up)});
      }
    }
  }
  r.feasible = r.worst() <= tol;
  return r;
}

KktResiduals kkt_residual(const DedsInstance& inst, double eps, const Schedule& sched) {
  if (!(eps > 0.0)) throw std::invalid_argument("kkt_residual: eps must be positive");
  require_shape(inst, sched);
  const auto l = total_load(inst);
  const auto sub = subgradient(inst, eps, sched);
  const std::size_t n = inst.units();
  KktResiduals r;
  for (std::size_t k = 0; k < inst.horizon(); ++k) {
    r.load = std::max(r.load, std::abs(sched.injection.column_sum(k) - l[k]));
    const double mean = sub.zeta1.column_sum(k) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      r.injection_consensus = std::max(r.injection_consensus, std::abs(sub.zeta1(i, k) - mean));
  }
  r.storage = sub.zeta2.max_abs();
  return r;
}

}  // namespace deds
