#pragma once

// One run of a scenario: the medium, a ChannelAgent per node and the segment
// Mediator, driven from a single event queue.
//
// Beacon ticks fall every tau_td from the grid origin (time 0, moved to the
// coordinator's arrival after a switch). Agents judge each tick once its
// beacon slot has passed, and every other tick opens a Mediator cycle.

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>

#include "wnslab/channel_layer.hpp"
#include "wnslab/mediator.hpp"
#include "wnslab/medium.hpp"
#include "wnslab/scenario.hpp"

namespace wnslab {

class Simulation final : public ChannelPort, public MediatorPort {
 public:
  explicit Simulation(const Scenario& scenario);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Runs to `until` (default: the scenario horizon). A blackout still open
  /// at the end is closed there so the trace stays balanced.
  void run(std::optional<SimTime> until = std::nullopt);

  const Trace& trace() const { return medium_.trace(); }
  Medium& medium() { return medium_; }
  Mediator& mediator() { return mediator_; }
  const Mediator& mediator() const { return mediator_; }
  const ChannelAgent& agent(NodeId id) const;
  const Scenario& scenario() const { return scenario_; }
  bool segment_failed() const { return stopped_; }
  bool blackout_open() const { return blackout_.has_value(); }

  // ChannelPort and MediatorPort
  SimTime now() const override { return medium_.now(); }
  void send(NodeId node, const Frame& f, bool loopback) override;
  void tune(NodeId node, ChannelId c) override;
  void after(SimTime delay, std::function<void()> action) override;
  void at(SimTime t, std::function<void()> action) override;
  void record(TraceEvent e) override;
  bool inaccessible_during(SimTime a, SimTime b) const override;
  std::vector<std::size_t> inaccessibility_overlapping(SimTime a, SimTime b) const override;
  std::optional<SimTime> last_inaccessibility_end(SimTime t) const override;
  void switch_started(NodeId node) override;
  void coordinator_arrived(ChannelId c) override;
  void switch_completed(NodeId node) override;
  void segment_failed(const std::string& reason) override;
  void exchange(NodeId node, Outcome outcome, SimTime a, SimTime b) override;
  std::vector<NodeId> members() const override;
  bool reachable(NodeId node) const override;

 private:
  void start_grid(SimTime origin);
  void tick(std::uint64_t generation, std::uint64_t m, SimTime t);
  void receive(NodeId receiver, const Reception& rx);
  void membership(NodeId node, bool joined);
  void maybe_close_blackout();
  ChannelAgent* find_agent(NodeId id);

  Scenario scenario_;
  Medium medium_;
  Mediator mediator_;
  std::map<NodeId, std::unique_ptr<ChannelAgent>> agents_;
  std::mt19937_64 payload_rng_;
  std::uint64_t grid_generation_ = 0;
  std::set<NodeId> switching_;
  std::optional<std::uint32_t> blackout_;
  bool stopped_ = false;
};

}  // namespace wnslab
