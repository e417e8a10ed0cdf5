#pragma once

#include "deds/graph.hpp"
#include "deds/problem.hpp"
#include "deds/scenario.hpp"

namespace deds::testing {

inline ScenarioConfig section_v_config() { return builtin_scenario("new-england-10"); }

inline DedsInstance section_v_instance() { return DedsInstance(section_v_config().instance); }

inline Digraph section_v_graph() {
  const auto cfg = section_v_config();
  return build_digraph(cfg.graph.vertices, cfg.graph.edges);
}

inline UnitProblem simple_unit(double a, double b, double c, std::size_t h = 1) {
  UnitProblem u;
  u.cost.assign(h, {a, b, c});
  u.p_min = 0.0;
  u.p_max = 1000.0;
  u.ramp_down = 1000.0;
  u.ramp_up = 1000.0;
  u.cap_min = -1000.0;
  u.cap_max = 1000.0;
  u.s_initial = 0.0;
  return u;
}

/// Instance whose external load sits at unit 1 and bus loads are zero.
inline DedsInstance make_instance(std::vector<UnitProblem> units, std::vector<double> load) {
  InstanceSpec s;
  s.horizon = load.size();
  s.units = std::move(units);
  s.external_load = std::move(load);
  s.bus_loads = UnitSlotArray(s.units.size(), s.horizon);
  return DedsInstance(std::move(s));
}

}  // namespace deds::testing
