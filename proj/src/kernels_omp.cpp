#include "deds/kernels.hpp"
#include "kernel_bodies.hpp"

namespace deds::kernels::parallel {

namespace {
using index_t = long long;
}

void subgradient(const DedsInstance& inst, double eps, const UnitSlotArray& injection,
                 const UnitSlotArray& storage, UnitSlotArray& zeta1, UnitSlotArray& zeta2) {
  const auto n = static_cast<index_t>(inst.units());
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i)
    detail::subgradient_unit(inst, eps, injection, storage, zeta1, zeta2,
                             static_cast<std::size_t>(i));
}

void laplacian_apply(const LaplacianData& lap, const UnitSlotArray& x, UnitSlotArray& out) {
  const auto n = static_cast<index_t>(lap.size());
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i) detail::laplacian_unit(lap, x, out, static_cast<std::size_t>(i));
}

void vector_field(const DedsInstance& inst, const LaplacianData& lap, const GainParameters& p,
                  const NetworkState& state, FieldWorkspace& ws, NetworkState& out) {
  detail::prepare(inst, state, ws, out);
  const auto n = static_cast<index_t>(inst.units());
#pragma omp parallel
  {
    // The Laplacian products read neighbor rows, so each phase ends with a barrier.
#pragma omp for schedule(static)
    for (index_t i = 0; i < n; ++i)
      detail::subgradient_unit(inst, p.eps, state.injection, state.storage, ws.zeta1, ws.zeta2,
                               static_cast<std::size_t>(i));
#pragma omp for schedule(static)
    for (index_t i = 0; i < n; ++i) {
      detail::laplacian_unit(lap, ws.zeta1, ws.lap_zeta1, static_cast<std::size_t>(i));
      detail::laplacian_unit(lap, state.z, ws.lap_z, static_cast<std::size_t>(i));
    }
#pragma omp for schedule(static)
    for (index_t i = 0; i < n; ++i)
      detail::field_unit(inst, p, state, ws, out, static_cast<std::size_t>(i));
  }
}

}  // namespace deds::kernels::parallel
