#include "deds/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "deds/kernels.hpp"
#include "deds/penalty.hpp"

namespace deds {

bool MessageAudit::only_out_neighbors(const Digraph& g) const {
  for (std::size_t r = 0; r < n_; ++r) {
    const auto nbrs = g.out_neighbors(r);
    for (std::size_t s = 0; s < n_; ++s) {
      if (count(r, s) == 0) continue;
      const bool allowed = std::any_of(nbrs.begin(), nbrs.end(),
                                       [&](const Neighbor& nb) { return nb.index == s; });
      if (!allowed) return false;
    }
  }
  return true;
}

const NeighborMessage& Inbox::from(std::size_t sender) const {
  auto it = std::lower_bound(
      messages_.begin(), messages_.end(), sender,
      [](const NeighborMessage& m, std::size_t id) { return m.sender < id; });
  if (it == messages_.end() || it->sender != sender)
    throw ProtocolError("agent " + std::to_string(owner_ + 1) + ": no message from unit " +
                        std::to_string(sender + 1));
  audit_.record(owner_, sender);
  return *it;
}

NeighborMessage agent_publish(AgentState& a, const GainParameters& p) {
  unit_subgradient(a.local, p.eps, a.injection, a.storage, a.zeta1, a.zeta2);
  return {a.id, a.z, a.zeta1};
}

void agent_step(AgentState& a, const GainParameters& p, const Inbox& inbox, double dt,
                bool anti_chatter) {
  const std::size_t h = a.injection.size();
  std::vector<const NeighborMessage*> received;
  received.reserve(a.out_neighbors.size());
  for (const auto& nb : a.out_neighbors) received.push_back(&inbox.from(nb.index));
  // Neighbors and received messages share the ascending-id order.
  auto lookup = [&](std::size_t slot, bool of_zeta) {
    return [&, slot, of_zeta, pos = std::size_t{0}](std::size_t) mutable {
      const NeighborMessage* m = received[pos++];
      return of_zeta ? m->zeta1[slot] : m->z[slot];
    };
  };

  for (std::size_t k = 0; k < h; ++k) {
    const double lap_zeta1 =
        kernels::rules::laplacian_row(a.out_degree, a.out_neighbors, a.zeta1[k], lookup(k, true));
    const double lap_z =
        kernels::rules::laplacian_row(a.out_degree, a.out_neighbors, a.z[k], lookup(k, false));
    double load = a.bus_load[k];
    if (a.external_load) load += (*a.external_load)[k];
    const auto d = kernels::rules::entry_derivative(p, a.local.has_storage, a.injection[k], a.z[k],
                                                    a.v[k], a.zeta2[k], lap_zeta1, lap_z, load);
    a.injection[k] += dt * d.injection;
    kernels::rules::storage_euler(a.storage[k], d.storage, dt, a.previous_storage_rate[k],
                                  anti_chatter, a.chatter_events);
    a.z[k] += dt * d.z;
    a.v[k] += dt * d.v;
  }
}

AgentNetwork::AgentNetwork(const DedsInstance& inst, const Digraph& g, const GainParameters& p,
                           const NetworkState& state0, AgentOptions options)
    : inst_(inst),
      graph_(g),
      lap_(laplacian(g)),
      gains_(p),
      options_(options),
      audit_(inst.units()) {
  p.validate();
  if (g.size() != inst.units())
    throw std::invalid_argument("digraph size does not match the unit count");
  require_shape(inst, state0);
  if (inst.anchor_unit() >= inst.units()) throw std::invalid_argument("anchor index out of range");

  const std::size_t n = inst.units();
  const std::size_t h = inst.horizon();
  agents_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    AgentState& a = agents_[i];
    a.id = i;
    auto copy_row = [&](const UnitSlotArray& arr) {
      const auto r = arr.row(i);
      return std::vector<double>(r.begin(), r.end());
    };
    a.injection = copy_row(state0.injection);
    a.storage = copy_row(state0.storage);
    a.z = copy_row(state0.z);
    a.v = copy_row(state0.v);
    a.local = inst.unit(i);
    a.bus_load = copy_row(inst.bus_loads());
    if (i == inst.anchor_unit()) a.external_load = inst.external_load();
    const auto nbrs = g.out_neighbors(i);
    a.out_neighbors.assign(nbrs.begin(), nbrs.end());
    a.out_degree = g.out_degree(i);
    a.zeta1.assign(h, 0.0);
    a.zeta2.assign(h, 0.0);
    a.previous_storage_rate.assign(h, 0.0);
  }
  outbox_.resize(n);
  inbox_.resize(n);
}

void AgentNetwork::round(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("round: dt must be positive");
  using index_t = long long;
  const auto n = static_cast<index_t>(agents_.size());
  const bool par = options_.policy == ExecPolicy::parallel;
  const std::size_t h = inst_.horizon();

#pragma omp parallel for schedule(static) if (par)
  for (index_t i = 0; i < n; ++i) outbox_[i] = agent_publish(agents_[i], gains_);

  // Barrier, then delivery: j's message goes to every i with j in N_out(i).
#pragma omp parallel for schedule(static) if (par)
  for (index_t i = 0; i < n; ++i) {
    auto& box = inbox_[i];
    box.clear();
    for (const auto& nb : graph_.out_neighbors(static_cast<std::size_t>(i)))
      box.push_back(outbox_[nb.index]);
  }
  const std::size_t edges = graph_.edge_count();
  stats_.rounds += 1;
  stats_.messages += edges;
  stats_.bytes += edges * (sizeof(std::uint64_t) + 2 * h * sizeof(double));

#pragma omp parallel for schedule(static) if (par)
  for (index_t i = 0; i < n; ++i) {
    const Inbox inbox(static_cast<std::size_t>(i), inbox_[i], audit_);
    agent_step(agents_[i], gains_, inbox, dt, options_.anti_chatter);
  }
}

NetworkState AgentNetwork::gather() const {
  NetworkState s(inst_.units(), inst_.horizon());
  for (const auto& a : agents_) {
    std::copy(a.injection.begin(), a.injection.end(), s.injection.row(a.id).begin());
    std::copy(a.storage.begin(), a.storage.end(), s.storage.row(a.id).begin());
    std::copy(a.z.begin(), a.z.end(), s.z.row(a.id).begin());
    std::copy(a.v.begin(), a.v.end(), s.v.row(a.id).begin());
  }
  return s;
}

std::size_t AgentNetwork::chatter_events() const {
  std::size_t total = 0;
  for (const auto& a : agents_) total += a.chatter_events;
  return total;
}

TrajectoryRecord AgentNetwork::run(const IntegrationOptions& opt) {
  if (opt.method != StepMethod::euler)
    throw std::invalid_argument("agent rounds implement the explicit Euler step only");
  std::vector<std::string> warnings;
  NetworkState state = gather();
  check_hypotheses(inst_, lap_, gains_, state, opt, warnings);
  const auto sched = make_step_schedule(opt.dt, opt.t_final, opt.sample_every);

  TrajectoryRecorder recorder(inst_, lap_, gains_, opt);
  bool stop = recorder.observe(0.0, state);
  std::size_t n = 0;
  while (!stop && n < sched.total_steps) {
    round(opt.dt);
    ++n;
    const bool sample = n % sched.sample_stride == 0 || n == sched.total_steps;
    if (sample) {
      state = gather();
      if (!state.all_finite())
        throw DivergenceError("non-finite agent state; dt is too large for the penalty stiffness");
      stop = recorder.observe(static_cast<double>(n) * opt.dt, state);
    } else {
      for (const auto& a : agents_)
        for (std::size_t k = 0; k < a.injection.size(); ++k)
          if (!std::isfinite(a.injection[k] + a.storage[k] + a.z[k] + a.v[k]))
            throw DivergenceError("non-finite agent state; dt is too large for the penalty stiffness");
    }
  }
  return recorder.finish(gather(), n, chatter_events(), std::move(warnings));
}

AgentNetwork init_agents(const DedsInstance& inst, const Digraph& g, const GainParameters& p,
                         const NetworkState& state0, AgentOptions options) {
  return AgentNetwork(inst, g, p, state0, options);
}

}  // namespace deds
