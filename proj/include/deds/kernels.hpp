#pragma once

// Per-unit data-parallel kernels for the coordination dynamics. `serial` is the reference
// implementation; `parallel` distributes units over OpenMP threads. Each output entry is
// computed by the same arithmetic in both, so their results are bitwise identical.

#include <span>

#include "deds/graph.hpp"
#include "deds/problem.hpp"
#include "deds/state.hpp"
#include "deds/types.hpp"

namespace deds::kernels {

struct FieldWorkspace {
  UnitSlotArray zeta1;
  UnitSlotArray zeta2;
  UnitSlotArray lap_zeta1;
  UnitSlotArray lap_z;

  void resize(std::size_t units, std::size_t slots);
};

/// Per-entry update rules shared by the kernels and by the agent-level implementation.
namespace rules {

// (L x)_i = d_i x_i - sum_j a_ij x_j, with j ascending.
template <class Lookup>
inline double laplacian_row(double diagonal, std::span<const Neighbor> neighbors, double self,
                            Lookup&& value_at) {
  double acc = diagonal * self;
  for (const auto& nb : neighbors) acc -= nb.weight * value_at(nb.index);
  return acc;
}

struct EntryDerivative {
  double injection;
  double storage;
  double z;
  double v;
};

inline EntryDerivative entry_derivative(const GainParameters& p, bool has_storage,
                                        double injection, double z, double v, double zeta2,
                                        double lap_zeta1, double lap_z, double local_load) {
  return {-lap_zeta1 + p.nu1 * z, has_storage ? -zeta2 : 0.0,
          -p.alpha * z - p.beta * lap_z - v + p.nu2 * (local_load - injection),
          (p.alpha * p.beta) * lap_z};
}

// Explicit Euler increment for one S entry. With the guard on, an increment whose sign
// flips relative to the previous step is halved.
inline void storage_euler(double& storage, double derivative, double dt, double& previous,
                          bool guard, std::size_t& events) {
  double scale = 1.0;
  if (guard && previous * derivative < 0.0) {
    scale = 0.5;
    ++events;
  }
  previous = derivative;
  storage += (scale * dt) * derivative;
}

}  // namespace rules

namespace serial {

void subgradient(const DedsInstance& inst, double eps, const UnitSlotArray& injection,
                 const UnitSlotArray& storage, UnitSlotArray& zeta1, UnitSlotArray& zeta2);

void laplacian_apply(const LaplacianData& lap, const UnitSlotArray& x, UnitSlotArray& out);

void vector_field(const DedsInstance& inst, const LaplacianData& lap, const GainParameters& p,
                  const NetworkState& state, FieldWorkspace& ws, NetworkState& out);

}  // namespace serial

namespace parallel {

void subgradient(const DedsInstance& inst, double eps, const UnitSlotArray& injection,
                 const UnitSlotArray& storage, UnitSlotArray& zeta1, UnitSlotArray& zeta2);

void laplacian_apply(const LaplacianData& lap, const UnitSlotArray& x, UnitSlotArray& out);

void vector_field(const DedsInstance& inst, const LaplacianData& lap, const GainParameters& p,
                  const NetworkState& state, FieldWorkspace& ws, NetworkState& out);

}  // namespace parallel

void vector_field(ExecPolicy policy, const DedsInstance& inst, const LaplacianData& lap,
                  const GainParameters& p, const NetworkState& state, FieldWorkspace& ws,
                  NetworkState& out);

}  // namespace deds::kernels
