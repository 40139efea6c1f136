#include "wnslab/simulation.hpp"

#include <algorithm>

namespace wnslab {

Simulation::Simulation(const Scenario& scenario)
    : scenario_(scenario),
      medium_(scenario.wns, scenario.faults, scenario.seed, MediumOptions{scenario.mutations.drop_data_loopback}),
      mediator_(scenario.wns, *this),
      payload_rng_(scenario.seed ^ 0x9E3779B97F4A7C15ULL) {
  if (auto bad = validate(scenario_); !bad.empty()) throw ScenarioError("invalid scenario: " + bad.front());
  const bool switching = !scenario_.mutations.disable_channel_layer;
  for (const auto& [id, n] : scenario_.wns.members) {
    const Role role = id == scenario_.wns.coordinator_id ? Role::Coordinator : Role::Member;
    agents_.emplace(id, std::make_unique<ChannelAgent>(id, role, scenario_.wns, scenario_.switching, *this, switching));
  }
  medium_.on_receive([this](NodeId r, const Reception& rx) { receive(r, rx); });
  medium_.on_membership([this](NodeId n, bool joined) { membership(n, joined); });
  for (const auto& w : scenario_.workload) {
    Bytes payload(w.payload_size);
    for (auto& b : payload) b = static_cast<std::uint8_t>(payload_rng_());
    medium_.schedule(w.send_time, [this, w, payload] {
      if (!stopped_) mediator_.send(w.sender, payload, w.deadline);
    });
  }
  start_grid(0);
}

const ChannelAgent& Simulation::agent(NodeId id) const {
  auto it = agents_.find(id);
  if (it == agents_.end()) throw SimError("no agent for node " + std::to_string(id));
  return *it->second;
}

ChannelAgent* Simulation::find_agent(NodeId id) {
  auto it = agents_.find(id);
  return it == agents_.end() ? nullptr : it->second.get();
}

void Simulation::run(std::optional<SimTime> until) {
  medium_.run_until(until.value_or(scenario_.horizon));
  if (blackout_) {
    record(ev::InaccessEnd{*blackout_});
    blackout_.reset();
  }
}

void Simulation::start_grid(SimTime origin) {
  const std::uint64_t gen = ++grid_generation_;
  medium_.schedule(origin, [this, gen, origin] { tick(gen, 0, origin); });
}

void Simulation::tick(std::uint64_t generation, std::uint64_t m, SimTime t) {
  if (generation != grid_generation_ || stopped_) return;
  if (auto* c = find_agent(scenario_.wns.coordinator_id); c && medium_.is_current_member(c->id())) c->beacon_tick(m);
  medium_.schedule(t + beacon_slot(), [this, generation, t] {
    if (generation != grid_generation_ || stopped_) return;
    for (NodeId id : members()) {
      if (auto* a = find_agent(id)) a->check_tick(t);
      if (stopped_) return;
    }
  });
  if (m % 2 == 0 && !blackout_) mediator_.cycle_start(t);
  medium_.schedule(t + scenario_.wns.params.tau_td, [this, generation, m, t] {
    tick(generation, m + 1, t + scenario_.wns.params.tau_td);
  });
}

void Simulation::receive(NodeId receiver, const Reception& rx) {
  if (stopped_ || !medium_.is_current_member(receiver)) return;
  ChannelAgent* a = find_agent(receiver);
  const auto result = decode(rx.bytes, RxContext{rx.channel, now(), receiver});
  if (const auto* signal = std::get_if<OmissionSignal>(&result)) {
    if (!scenario_.mutations.disable_signalling) record(ev::SignalEmitted{rx.tx, *signal});
    if (a) a->on_corrupted();
    return;
  }
  const Frame& f = std::get<Frame>(result);
  if (f.wns_id != scenario_.wns.id) return;
  if (a) a->on_frame(f);
  mediator_.frame_received(receiver, f);
}

void Simulation::membership(NodeId node, bool joined) {
  ChannelAgent* a = find_agent(node);
  if (joined) {
    if (a) {
      const ChannelAgent* c = find_agent(scenario_.wns.coordinator_id);
      a->rejoin(c ? c->channel() : medium_.tuned(node));
    }
    return;
  }
  if (a) a->depart();
  switching_.erase(node);
  mediator_.member_left(node);
  maybe_close_blackout();
}

void Simulation::send(NodeId node, const Frame& f, bool loopback) {
  if (stopped_ || !medium_.is_current_member(node)) return;
  medium_.transmit(node, f, medium_.tuned(node), loopback);
}

void Simulation::tune(NodeId node, ChannelId c) { medium_.tune(node, c); }

void Simulation::after(SimTime delay, std::function<void()> action) {
  medium_.schedule(now() + delay, [this, action = std::move(action)] {
    if (!stopped_) action();
  });
}

void Simulation::at(SimTime t, std::function<void()> action) {
  medium_.schedule(t, [this, action = std::move(action)] {
    if (!stopped_) action();
  });
}

void Simulation::record(TraceEvent e) { medium_.record(std::move(e)); }

bool Simulation::inaccessible_during(SimTime a, SimTime b) const { return medium_.inaccessible_during(a, b); }

std::vector<std::size_t> Simulation::inaccessibility_overlapping(SimTime a, SimTime b) const {
  return medium_.inaccessibility_overlapping(a, b);
}

std::optional<SimTime> Simulation::last_inaccessibility_end(SimTime t) const {
  return medium_.last_inaccessibility_end(t);
}

void Simulation::switch_started(NodeId node) {
  switching_.insert(node);
  if (blackout_) return;
  blackout_ = medium_.next_period_id();
  record(ev::InaccessStart{*blackout_, ev::InaCause::Switch});
  mediator_.blackout_started();
}

void Simulation::coordinator_arrived(ChannelId) { start_grid(now()); }

void Simulation::switch_completed(NodeId node) {
  switching_.erase(node);
  maybe_close_blackout();
}

void Simulation::maybe_close_blackout() {
  if (!blackout_ || stopped_) return;
  const ChannelAgent* c = find_agent(scenario_.wns.coordinator_id);
  if (!c || c->switching() || c->probing()) return;
  for (NodeId id : members()) {
    const ChannelAgent* a = find_agent(id);
    if (a && (a->switching() || a->channel() != c->channel())) return;
  }
  record(ev::InaccessEnd{*blackout_});
  blackout_.reset();
  start_grid(now());  // the next cycle opens as soon as the segment is reachable again
}

void Simulation::segment_failed(const std::string& reason) {
  if (stopped_) return;
  record(ev::SegmentFailure{reason});
  if (blackout_) {
    record(ev::InaccessEnd{*blackout_});
    blackout_.reset();
  }
  stopped_ = true;
  ++grid_generation_;
}

void Simulation::exchange(NodeId node, Outcome outcome, SimTime a, SimTime b) {
  if (auto* ag = find_agent(node)) ag->on_exchange(outcome, a, b);
}

std::vector<NodeId> Simulation::members() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : medium_.segment().members) out.push_back(id);
  return out;
}

bool Simulation::reachable(NodeId node) const {
  if (stopped_ || !medium_.is_current_member(node)) return false;
  auto it = agents_.find(node);
  return it == agents_.end() || (!it->second->switching() && !it->second->departed());
}

}  // namespace wnslab
