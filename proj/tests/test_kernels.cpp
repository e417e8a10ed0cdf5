#include "doctest.h"

#include <omp.h>

#include <bit>
#include <cmath>
#include <cstdint>

#include "deds/dynamics.hpp"
#include "deds/kernels.hpp"
#include "deds/penalty.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace deds;
using deds::testing::Rng;

namespace {

struct Case {
  DedsInstance inst;
  std::vector<Edge> edges;
  LaplacianData lap;
  NetworkState state;
};

Case random_case(Rng& rng, std::size_t n, std::size_t h) {
  auto inst = testing::random_instance(rng, {n, h, 0.6, true});
  auto edges = testing::random_balanced_edges(rng, n);
  auto lap = laplacian(build_digraph(n, edges));
  auto state = testing::random_state(rng, inst);
  for (std::size_t i = 0; i < n; ++i)
    if (!inst.has_storage(i))
      for (std::size_t k = 0; k < h; ++k) state.storage(i, k) = 0.0;
  return {std::move(inst), std::move(edges), std::move(lap), std::move(state)};
}

bool bitwise_equal(const UnitSlotArray& a, const UnitSlotArray& b) {
  if (a.units() != b.units() || a.slots() != b.slots()) return false;
  for (std::size_t e = 0; e < a.size(); ++e)
    if (std::bit_cast<std::uint64_t>(a.flat()[e]) != std::bit_cast<std::uint64_t>(b.flat()[e])) return false;
  return true;
}

bool bitwise_equal(const NetworkState& a, const NetworkState& b) {
  return bitwise_equal(a.injection, b.injection) && bitwise_equal(a.storage, b.storage) &&
         bitwise_equal(a.z, b.z) && bitwise_equal(a.v, b.v);
}

struct ThreadCount {
  explicit ThreadCount(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("parallel subgradient and Laplacian match the serial reference bitwise") {
  ThreadCount threads(4);
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    auto c = random_case(rng, rng.index(1, 40), rng.index(1, 6));
    const std::size_t n = c.inst.units(), h = c.inst.horizon();
    UnitSlotArray a1(n, h), a2(n, h), b1(n, h), b2(n, h);
    kernels::serial::subgradient(c.inst, 0.01, c.state.injection, c.state.storage, a1, a2);
    kernels::parallel::subgradient(c.inst, 0.01, c.state.injection, c.state.storage, b1, b2);
    REQUIRE(bitwise_equal(a1, b1));
    REQUIRE(bitwise_equal(a2, b2));
    kernels::serial::laplacian_apply(c.lap, c.state.z, a1);
    kernels::parallel::laplacian_apply(c.lap, c.state.z, b1);
    REQUIRE(bitwise_equal(a1, b1));
  }
}

TEST_CASE("kernel subgradient equals the library subgradient") {
  Rng rng(32);
  for (int t = 0; t < 100; ++t) {
    auto c = random_case(rng, rng.index(1, 8), rng.index(1, 5));
    const auto g = subgradient(c.inst, 0.05, c.state.schedule());
    UnitSlotArray z1(c.inst.units(), c.inst.horizon()), z2(c.inst.units(), c.inst.horizon());
    kernels::serial::subgradient(c.inst, 0.05, c.state.injection, c.state.storage, z1, z2);
    REQUIRE(bitwise_equal(g.zeta1, z1));
    REQUIRE(bitwise_equal(g.zeta2, z2));
  }
}

TEST_CASE("sparse Laplacian product matches the dense product") {
  Rng rng(33);
  for (int t = 0; t < 100; ++t) {
    auto c = random_case(rng, rng.index(1, 15), rng.index(1, 4));
    const auto L = testing::dense_laplacian(c.inst.units(), c.edges);
    UnitSlotArray out(c.inst.units(), c.inst.horizon());
    kernels::serial::laplacian_apply(c.lap, c.state.z, out);
    for (std::size_t k = 0; k < c.inst.horizon(); ++k)
      for (std::size_t i = 0; i < c.inst.units(); ++i) {
        double ref = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < c.inst.units(); ++j) {
          ref += L[i][j] * c.state.z(j, k);
          scale += std::abs(L[i][j] * c.state.z(j, k));
        }
        REQUIRE(std::abs(out(i, k) - ref) <= 1e-13 * std::max(1.0, scale));
      }
  }
}

TEST_CASE("vector field matches a dense reference assembly") {
  Rng rng(34);
  for (int t = 0; t < 100; ++t) {
    auto c = random_case(rng, rng.index(1, 10), rng.index(1, 4));
    const double eps = rng.uniform(0.01, 0.5);
    const GainParameters p{rng.uniform(0.5, 5), rng.uniform(0.5, 10), rng.uniform(0.1, 1), rng.uniform(0.1, 1), eps};
    const std::size_t n = c.inst.units(), h = c.inst.horizon();
    const auto L = testing::dense_laplacian(n, c.edges);
    const auto g = subgradient(c.inst, eps, c.state.schedule());
    const auto d = vector_field(c.inst, c.lap, p, c.state);
    for (std::size_t k = 0; k < h; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        double lz1 = 0.0, lz = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          lz1 += L[i][j] * g.zeta1(j, k);
          lz += L[i][j] * c.state.z(j, k);
        }
        const double b = c.inst.bus_loads()(i, k) + (i == c.inst.anchor_unit() ? c.inst.external_load()[k] : 0.0);
        const double dI = -lz1 + p.nu1 * c.state.z(i, k);
        const double dS = c.inst.has_storage(i) ? -g.zeta2(i, k) : 0.0;
        const double dz = -p.alpha * c.state.z(i, k) - p.beta * lz - c.state.v(i, k) + p.nu2 * (b - c.state.injection(i, k));
        const double dv = p.alpha * p.beta * lz;
        const double tol = 1e-11 * (1.0 + c.state.max_abs() + 1.0 / eps) * (1.0 + c.lap.matrix(i, i));
        REQUIRE(std::abs(d.injection(i, k) - dI) <= tol);
        REQUIRE(d.storage(i, k) == dS);
        REQUIRE(std::abs(d.z(i, k) - dz) <= tol * (1 + p.alpha * p.beta));
        REQUIRE(std::abs(d.v(i, k) - dv) <= tol * (1 + p.alpha * p.beta));
      }
  }
}

TEST_CASE("parallel vector field and Euler trajectory match the serial reference bitwise") {
  ThreadCount threads(3);
  Rng rng(35);
  for (int t = 0; t < 20; ++t) {
    auto c = random_case(rng, rng.index(2, 30), rng.index(1, 6));
    const GainParameters p{4.0, 10.0, 0.65, 0.65, 0.05};
    REQUIRE(bitwise_equal(vector_field(c.inst, c.lap, p, c.state, ExecPolicy::serial),
                          vector_field(c.inst, c.lap, p, c.state, ExecPolicy::parallel)));
    Stepper serial(c.inst, c.lap, p, StepMethod::euler, ExecPolicy::serial, true);
    Stepper parallel(c.inst, c.lap, p, StepMethod::euler, ExecPolicy::parallel, true);
    NetworkState a = c.state, b = c.state;
    for (int s = 0; s < 200; ++s) {
      serial.advance(a, 1e-3);
      parallel.advance(b, 1e-3);
    }
    REQUIRE(bitwise_equal(a, b));
    REQUIRE(serial.chatter_events() == parallel.chatter_events());
  }
}
