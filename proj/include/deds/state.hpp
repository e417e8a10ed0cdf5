#pragma once

#include <cstddef>
#include <stdexcept>

#include "deds/problem.hpp"
#include "deds/types.hpp"

namespace deds {

struct GainParameters {
  double alpha = 0.0;
  double beta = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
  double eps = 0.0;  // penalty weight

  void validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(nu1 > 0.0) || !(nu2 > 0.0) || !(eps > 0.0))
      throw std::invalid_argument("gains alpha, beta, nu1, nu2 and eps must all be positive");
  }

  friend bool operator==(const GainParameters&, const GainParameters&) = default;
};

/// (I, S, z, v), each units x slots. The same type carries time derivatives.
struct NetworkState {
  UnitSlotArray injection;
  UnitSlotArray storage;
  UnitSlotArray z;
  UnitSlotArray v;

  NetworkState() = default;
  NetworkState(std::size_t units, std::size_t slots)
      : injection(units, slots), storage(units, slots), z(units, slots), v(units, slots) {}

  std::size_t units() const { return injection.units(); }
  std::size_t slots() const { return injection.slots(); }

  Schedule schedule() const { return Schedule(injection, storage); }

  bool all_finite() const {
    return injection.all_finite() && storage.all_finite() && z.all_finite() && v.all_finite();
  }

  double max_abs() const {
    return std::max({injection.max_abs(), storage.max_abs(), z.max_abs(), v.max_abs()});
  }

  friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

inline void require_shape(const DedsInstance& inst, const NetworkState& s) {
  require_shape(s.injection, inst.units(), inst.horizon(), "state I");
  require_shape(s.storage, inst.units(), inst.horizon(), "state S");
  require_shape(s.z, inst.units(), inst.horizon(), "state z");
  require_shape(s.v, inst.units(), inst.horizon(), "state v");
}

double max_abs_difference(const NetworkState& a, const NetworkState& b);

}  // namespace deds
