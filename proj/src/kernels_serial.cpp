#include "deds/kernels.hpp"
#include "kernel_bodies.hpp"

namespace deds::kernels {

void FieldWorkspace::resize(std::size_t units, std::size_t slots) {
  if (zeta1.units() == units && zeta1.slots() == slots) return;
  zeta1 = UnitSlotArray(units, slots);
  zeta2 = UnitSlotArray(units, slots);
  lap_zeta1 = UnitSlotArray(units, slots);
  lap_z = UnitSlotArray(units, slots);
}

void vector_field(ExecPolicy policy, const DedsInstance& inst, const LaplacianData& lap,
                  const GainParameters& p, const NetworkState& state, FieldWorkspace& ws,
                  NetworkState& out) {
  if (policy == ExecPolicy::parallel)
    parallel::vector_field(inst, lap, p, state, ws, out);
  else
    serial::vector_field(inst, lap, p, state, ws, out);
}

namespace serial {

void subgradient(const DedsInstance& inst, double eps, const UnitSlotArray& injection,
                 const UnitSlotArray& storage, UnitSlotArray& zeta1, UnitSlotArray& zeta2) {
  for (std::size_t i = 0; i < inst.units(); ++i)
    detail::subgradient_unit(inst, eps, injection, storage, zeta1, zeta2, i);
}

void laplacian_apply(const LaplacianData& lap, const UnitSlotArray& x, UnitSlotArray& out) {
  for (std::size_t i = 0; i < lap.size(); ++i) detail::laplacian_unit(lap, x, out, i);
}

void vector_field(const DedsInstance& inst, const LaplacianData& lap, const GainParameters& p,
                  const NetworkState& state, FieldWorkspace& ws, NetworkState& out) {
  detail::prepare(inst, state, ws, out);
  subgradient(inst, p.eps, state.injection, state.storage, ws.zeta1, ws.zeta2);
  laplacian_apply(lap, ws.zeta1, ws.lap_zeta1);
  laplacian_apply(lap, state.z, ws.lap_z);
  for (std::size_t i = 0; i < inst.units(); ++i) detail::field_unit(inst, p, state, ws, out, i);
}

}  // namespace serial
}  // namespace deds::kernels
