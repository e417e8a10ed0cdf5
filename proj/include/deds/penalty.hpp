#pragma once

#include <cstddef>
#include <span>

#include "deds/problem.hpp"
#include "deds/types.hpp"

namespace deds {

/// Constraint residuals, positive when violated. t1..t5 are units x slots, t6/t7 are
/// units x (slots - 1). Storage terms of units without storage are -inf (never active).
struct PenaltyTerms {
  UnitSlotArray t1;  // P^m - I - S
  UnitSlotArray t2;  // I + S - P^M
  UnitSlotArray t3;  // C^m - S^(0) - prefix(S)
  UnitSlotArray t4;  // S^(0) + prefix(S) - C^M
  UnitSlotArray t5;  // -I
  UnitSlotArray t6;  // -R^l - (G^(k+1) - G^(k))
  UnitSlotArray t7;  // (G^(k+1) - G^(k)) - R^u
};

enum class KinkRule { midpoint };

struct PenaltySubgradient {
  UnitSlotArray zeta1;  // element of the partial generalized gradient in I
  UnitSlotArray zeta2;  // element of the partial generalized gradient in S
  KinkRule rule = KinkRule::midpoint;
};

/// Derivative of [u]^+ under the midpoint rule: 0, 1/2 or 1.
constexpr double hinge_slope(double u) { return u > 0.0 ? 1.0 : (u < 0.0 ? 0.0 : 0.5); }

PenaltyTerms penalty_terms(const DedsInstance& inst, const Schedule& sched);

/// Sum of [T_j]^+ over one unit's horizon, unscaled.
double unit_penalty(const UnitProblem& unit, std::span<const double> injection,
                    std::span<const double> storage);

/// f^eps restricted to one unit; f^eps is the sum of these over units.
double unit_penalized_cost(const UnitProblem& unit, double eps, std::span<const double> injection,
                           std::span<const double> storage);

double penalized_cost(const DedsInstance& inst, double eps, const Schedule& sched);

/// Canonical subgradient rows for one unit. Depends only on that unit's data and rows.
void unit_subgradient(const UnitProblem& unit, double eps, std::span<const double> injection,
                      std::span<const double> storage, std::span<double> zeta1,
                      std::span<double> zeta2);

PenaltySubgradient subgradient(const DedsInstance& inst, double eps, const Schedule& sched);

/// rho / (f_slater - f_opt). Pick eps strictly below the returned value.
double epsilon_upper_bound(double rho, double f_slater, double f_opt);

/// Smallest slack over all inequality constraints (negative if some constraint is violated).
double inequality_margin(const DedsInstance& inst, const Schedule& sched);

}  // namespace deds
