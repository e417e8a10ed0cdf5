#pragma once

// Loop bodies shared by the serial and OpenMP kernels; one call handles one unit.

#include "deds/kernels.hpp"
#include "deds/penalty.hpp"

namespace deds::kernels::detail {

inline void subgradient_unit(const DedsInstance& inst, double eps, const UnitSlotArray& injection,
                             const UnitSlotArray& storage, UnitSlotArray& zeta1,
                             UnitSlotArray& zeta2, std::size_t i) {
  unit_subgradient(inst.unit(i), eps, injection.row(i), storage.row(i), zeta1.row(i),
                   zeta2.row(i));
}

inline void laplacian_unit(const LaplacianData& lap, const UnitSlotArray& x, UnitSlotArray& out,
                           std::size_t i) {
  const auto& row = lap.rows[i];
  for (std::size_t k = 0; k < x.slots(); ++k)
    out(i, k) = rules::laplacian_row(row.diagonal, row.neighbors, x(i, k),
                                     [&](std::size_t j) { return x(j, k); });
}

inline void field_unit(const DedsInstance& inst, const GainParameters& p,
                       const NetworkState& state, const FieldWorkspace& ws, NetworkState& out,
                       std::size_t i) {
  const bool storage = inst.has_storage(i);
  for (std::size_t k = 0; k < inst.horizon(); ++k) {
    const auto d = rules::entry_derivative(p, storage, state.injection(i, k), state.z(i, k),
                                           state.v(i, k), ws.zeta2(i, k), ws.lap_zeta1(i, k),
                                           ws.lap_z(i, k), inst.local_load(i, k));
    out.injection(i, k) = d.injection;
    out.storage(i, k) = d.storage;
    out.z(i, k) = d.z;
    out.v(i, k) = d.v;
  }
}

inline void prepare(const DedsInstance& inst, const NetworkState& state, FieldWorkspace& ws,
                    NetworkState& out) {
  require_shape(inst, state);
  ws.resize(inst.units(), inst.horizon());
  if (!out.injection.same_shape(state.injection)) out = NetworkState(inst.units(), inst.horizon());
}

}  // namespace deds::kernels::detail
