#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "deds/agents.hpp"
#include "deds/dynamics.hpp"
#include "deds/kernels.hpp"
#include "deds/oracle.hpp"

namespace {

struct Fixture {
  deds::DedsInstance inst;
  deds::Digraph graph;
  deds::LaplacianData lap;
  deds::GainParameters gains{4.0, 10.0, 0.65, 0.65, 0.007};
  deds::NetworkState state;
};

// Directed ring, h = 6, random quadratic costs.
Fixture make_fixture(std::size_t n) {
  constexpr std::size_t h = 6;
  std::mt19937_64 rng(12345 + n);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  deds::InstanceSpec spec;
  spec.horizon = h;
  spec.external_load.assign(h, 0.0);
  spec.bus_loads = deds::UnitSlotArray(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    deds::UnitProblem u;
    u.cost.assign(h, {200.0, 7.0 + 5.0 * u01(rng), 0.007 + 0.003 * u01(rng)});
    u.p_max = 500.0 + 600.0 * u01(rng);
    u.ramp_down = 100.0;
    u.ramp_up = 60.0;
    u.cap_min = 5.0;
    u.cap_max = 100.0;
    u.s_initial = 5.0;
    spec.units.push_back(u);
    for (std::size_t k = 0; k < h; ++k) spec.bus_loads(i, k) = 200.0 + 50.0 * u01(rng);
  }
  std::vector<deds::Edge> edges;
  for (std::size_t i = 1; i <= n; ++i) edges.push_back({i, i % n + 1, 1.0});
  Fixture f{deds::DedsInstance(spec)};
  f.graph = deds::build_digraph(n, edges);
  f.lap = deds::laplacian(f.graph);
  f.state = deds::NetworkState(n, h);
  for (double& x : f.state.injection.flat()) x = 300.0 * u01(rng);
  for (double& x : f.state.storage.flat()) x = 10.0 * (u01(rng) - 0.5);
  for (double& x : f.state.z.flat()) x = u01(rng) - 0.5;
  return f;
}

void BM_VectorField(benchmark::State& st, deds::ExecPolicy policy) {
  const Fixture f = make_fixture(static_cast<std::size_t>(st.range(0)));
  deds::kernels::FieldWorkspace ws;
  deds::NetworkState out;
  for (auto _ : st) {
    deds::kernels::vector_field(policy, f.inst, f.lap, f.gains, f.state, ws, out);
    benchmark::DoNotOptimize(out.injection.flat().data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long long>(f.state.injection.size()));
}

void BM_EulerStep(benchmark::State& st, deds::ExecPolicy policy) {
  const Fixture f = make_fixture(static_cast<std::size_t>(st.range(0)));
  deds::Stepper stepper(f.inst, f.lap, f.gains, deds::StepMethod::euler, policy, true);
  deds::NetworkState s = f.state;
  for (auto _ : st) {
    stepper.advance(s, 1e-4);
    benchmark::DoNotOptimize(s.injection.flat().data());
  }
}

void BM_AgentRound(benchmark::State& st, deds::ExecPolicy policy) {
  const Fixture f = make_fixture(static_cast<std::size_t>(st.range(0)));
  deds::AgentNetwork net(f.inst, f.graph, f.gains, f.state, {policy, true});
  for (auto _ : st) net.round(1e-4);
}

void BM_BruteForce(benchmark::State& st, deds::ExecPolicy policy) {
  deds::InstanceSpec spec;
  spec.horizon = 1;
  spec.external_load = {8.0};
  spec.bus_loads = deds::UnitSlotArray(2, 1);
  for (int i = 0; i < 2; ++i) {
    deds::UnitProblem u;
    u.cost = {{0.0, 1.0 + i, 0.5}};
    u.p_max = 10.0;
    u.ramp_down = u.ramp_up = 10.0;
    u.cap_min = 0.0;
    u.cap_max = 4.0;
    spec.units.push_back(u);
  }
  const deds::DedsInstance inst(spec);
  for (auto _ : st) benchmark::DoNotOptimize(deds::brute_force_tiny(inst, 0.1, 0.05, policy).optimal_cost);
}

}  // namespace

BENCHMARK_CAPTURE(BM_VectorField, serial, deds::ExecPolicy::serial)->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_VectorField, parallel, deds::ExecPolicy::parallel)->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_EulerStep, serial, deds::ExecPolicy::serial)->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_EulerStep, parallel, deds::ExecPolicy::parallel)->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_AgentRound, serial, deds::ExecPolicy::serial)->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_AgentRound, parallel, deds::ExecPolicy::parallel)->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_BruteForce, serial, deds::ExecPolicy::serial);
BENCHMARK_CAPTURE(BM_BruteForce, parallel, deds::ExecPolicy::parallel);

BENCHMARK_MAIN();
