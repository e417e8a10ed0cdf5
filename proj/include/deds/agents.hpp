#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "deds/dynamics.hpp"
#include "deds/graph.hpp"
#include "deds/problem.hpp"
#include "deds/state.hpp"

namespace deds {

/// What unit i holds: its own rows of (I, S, z, v) and its own problem data.
struct AgentState {
  std::size_t id = 0;
  std::vector<double> injection;
  std::vector<double> storage;
  std::vector<double> z;
  std::vector<double> v;

  UnitProblem local;
  std::vector<double> bus_load;
  std::optional<std::vector<double>> external_load;  // anchor unit only
  std::vector<Neighbor> out_neighbors;               // ascending id
  double out_degree = 0.0;

  // Scratch and guard history, never shared.
  std::vector<double> zeta1;
  std::vector<double> zeta2;
  std::vector<double> previous_storage_rate;
  std::size_t chatter_events = 0;
};

struct NeighborMessage {
  std::size_t sender = 0;
  std::vector<double> z;
  std::vector<double> zeta1;
};

struct CommunicationStats {
  std::size_t rounds = 0;
  std::size_t messages = 0;
  std::size_t bytes = 0;
};

/// Counts, per (reader, sender), how often an agent read a received message.
class MessageAudit {
 public:
  explicit MessageAudit(std::size_t n = 0) : n_(n), counts_(n * n, 0) {}
  void record(std::size_t reader, std::size_t sender) { ++counts_[reader * n_ + sender]; }
  std::size_t count(std::size_t reader, std::size_t sender) const {
    return counts_[reader * n_ + sender];
  }
  /// True iff every read went to an out-neighbor of the reader.
  bool only_out_neighbors(const Digraph& g) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

/// Messages delivered to one agent, sorted by sender.
class Inbox {
 public:
  Inbox(std::size_t owner, std::span<const NeighborMessage> messages, MessageAudit& audit)
      : owner_(owner), messages_(messages), audit_(audit) {}
  /// Throws ProtocolError when no message from `sender` was delivered.
  const NeighborMessage& from(std::size_t sender) const;

 private:
  std::size_t owner_;
  std::span<const NeighborMessage> messages_;
  MessageAudit& audit_;
};

/// Phase one: local subgradient, then the message for in-neighbors.
NeighborMessage agent_publish(AgentState& agent, const GainParameters& p);

/// Phase two: one Euler step of the agent's rows from local data and received messages.
void agent_step(AgentState& agent, const GainParameters& p, const Inbox& inbox, double dt,
                bool anti_chatter);

struct AgentOptions {
  ExecPolicy policy = ExecPolicy::serial;
  bool anti_chatter = true;
};

/// Simulation harness: delivers messages along edges and observes the network.
class AgentNetwork {
 public:
  AgentNetwork(const DedsInstance& inst, const Digraph& g, const GainParameters& p,
               const NetworkState& state0, AgentOptions options = {});

  std::size_t size() const { return agents_.size(); }
  const AgentState& agent(std::size_t i) const { return agents_[i]; }

  void round(double dt);
  NetworkState gather() const;

  /// Same record format and stop rule as `integrate`.
  TrajectoryRecord run(const IntegrationOptions& opt);

  const CommunicationStats& stats() const { return stats_; }
  const MessageAudit& audit() const { return audit_; }
  std::size_t chatter_events() const;

 private:
  DedsInstance inst_;  // observation only
  Digraph graph_;
  LaplacianData lap_;  // observation only
  GainParameters gains_;
  AgentOptions options_;
  std::vector<AgentState> agents_;
  std::vector<NeighborMessage> outbox_;
  std::vector<std::vector<NeighborMessage>> inbox_;
  CommunicationStats stats_;
  MessageAudit audit_;
};

AgentNetwork init_agents(const DedsInstance& inst, const Digraph& g, const GainParameters& p,
                         const NetworkState& state0, AgentOptions options = {});

}  // namespace deds
