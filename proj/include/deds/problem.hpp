#pragma once

#include <cstddef>
#include <vector>

#include "deds/types.hpp"

namespace deds {

/// f(p) = a + b p + c p^2 with c >= 0.
struct QuadraticCost {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double value(double p) const { return a + (b + c * p) * p; }
  double derivative(double p) const { return b + 2.0 * c * p; }

  friend bool operator==(const QuadraticCost&, const QuadraticCost&) = default;
};

/// Everything a single unit knows about its own constraints and costs.
struct UnitProblem {
  std::vector<QuadraticCost> cost;  // one per slot
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_down = 0.0;
  double ramp_up = 0.0;
  double cap_min = 0.0;
  double cap_max = 0.0;
  double s_initial = 0.0;
  bool has_storage = true;
  // Lower bound on injection; 0 in the dispatch problem, raised only when tightening
  // constraints to build interior points.
  double injection_min = 0.0;

  friend bool operator==(const UnitProblem&, const UnitProblem&) = default;
};

/// Plain description of an instance. Validated when wrapped in DedsInstance.
struct InstanceSpec {
  std::size_t horizon = 0;
  std::vector<UnitProblem> units;
  std::vector<double> external_load;  // per slot, known only to the anchor unit
  UnitSlotArray bus_loads;            // units x slots
  std::size_t anchor_unit = 0;        // 0-based

  friend bool operator==(const InstanceSpec&, const InstanceSpec&) = default;
};

class DedsInstance {
 public:
  /// Throws std::invalid_argument when an invariant fails.
  explicit DedsInstance(InstanceSpec spec);

  std::size_t units() const { return spec_.units.size(); }
  std::size_t horizon() const { return spec_.horizon; }
  const UnitProblem& unit(std::size_t i) const { return spec_.units[i]; }
  const QuadraticCost& cost(std::size_t i, std::size_t k) const { return spec_.units[i].cost[k]; }
  std::size_t anchor_unit() const { return spec_.anchor_unit; }
  const std::vector<double>& external_load() const { return spec_.external_load; }
  const UnitSlotArray& bus_loads() const { return spec_.bus_loads; }
  bool has_storage(std::size_t i) const { return spec_.units[i].has_storage; }
  const InstanceSpec& spec() const { return spec_; }

  /// l_i^(k) as seen by unit i: its bus load, plus the external load at the anchor.
  double local_load(std::size_t i, std::size_t k) const {
    double load = spec_.bus_loads(i, k);
    if (i == spec_.anchor_unit) load += spec_.external_load[k];
    return load;
  }

  friend bool operator==(const DedsInstance&, const DedsInstance&) = default;

 private:
  InstanceSpec spec_;
};

struct Schedule {
  UnitSlotArray injection;  // I, MW
  UnitSlotArray storage;    // S, MW

  Schedule() = default;
  Schedule(std::size_t units, std::size_t slots)
      : injection(units, slots), storage(units, slots) {}
  Schedule(UnitSlotArray i, UnitSlotArray s) : injection(std::move(i)), storage(std::move(s)) {}

  double generation(std::size_t i, std::size_t k) const {
    return injection(i, k) + storage(i, k);
  }
};

void require_shape(const DedsInstance& inst, const Schedule& sched);

inline constexpr double kDefaultFeasibilityTol = 1e-6;

struct FeasibilityReport {
  double load = 0.0;       // |1^T I^(k) - l^(k)|
  double box = 0.0;        // P^m <= I + S <= P^M
  double storage = 0.0;    // C^m <= S^(0) + prefix sums <= C^M
  double injection = 0.0;  // I >= 0
  double ramp = 0.0;       // -R^l <= change in generation <= R^u
  double tol = kDefaultFeasibilityTol;
  bool feasible = true;

  double worst() const;
};

std::vector<double> total_load(const DedsInstance& inst);

double evaluate_cost(const DedsInstance& inst, const Schedule& sched);

FeasibilityReport check_feasibility(const DedsInstance& inst, const Schedule& sched,
                                    double tol = kDefaultFeasibilityTol);

struct KktResiduals {
  double load = 0.0;
  double storage = 0.0;
  double injection_consensus = 0.0;

  double max() const;
};

/// Optimality residuals for the solution-set characterization using the canonical
/// (midpoint) subgradient selection.
KktResiduals kkt_residual(const DedsInstance& inst, double eps, const Schedule& sched);

}  // namespace deds
