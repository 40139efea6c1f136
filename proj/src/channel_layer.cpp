#include "wnslab/channel_layer.hpp"

#include <algorithm>
#include <stdexcept>

#include "wnslab/medium.hpp"

namespace wnslab {

OmissionCounter observe(OmissionCounter counter, Outcome outcome, SimTime t, SimTime tau_rd) {
  if (counter.last_observation && t < *counter.last_observation) {
    throw std::invalid_argument("observation time regressed");
  }
  counter.last_observation = t;
  if (outcome == Outcome::Ok) {
    counter.consecutive = 0;
  } else {
    ++counter.consecutive;
    counter.window_events.push_back(t);
  }
  const SimTime horizon = t >= tau_rd ? t - tau_rd : 0;
  while (!counter.window_events.empty() && counter.window_events.front() < horizon) {
    counter.window_events.pop_front();
  }
  counter.consecutive =
      std::min<std::uint32_t>(counter.consecutive, static_cast<std::uint32_t>(counter.window_events.size()));
  return counter;
}

bool channel_failed(const OmissionCounter& counter, const WnSParams& params) {
  return counter.consecutive > params.k;
}

ChannelId next_channel(ChannelId current, std::span<const ChannelId> channels) {
  auto it = std::find(channels.begin(), channels.end(), current);
  if (it == channels.end()) throw std::invalid_argument("channel " + std::to_string(current) + " not in segment");
  ++it;
  return it == channels.end() ? channels.front() : *it;
}

SwitchConfig default_switch_config(const WnSParams& p) {
  SwitchConfig cfg;
  cfg.t_silence = 2 * p.tau_td;
  cfg.t_beacon_wait = 2 * p.tau_td;
  cfg.beacon_cadence = p.tau_td;
  cfg.repetitions = p.k + 1;
  return cfg;
}

SimTime switch_worst_case(const WnSParams& p, const SwitchConfig& cfg) {
  return cfg.t_silence + static_cast<SimTime>(p.f) * (cfg.hop_time + cfg.t_beacon_wait);
}

SimTime beacon_slot() { return airtime_for_length(kMinFrameBytes + 2) + 2; }

std::string_view to_string(Trigger t) {
  switch (t) {
    case Trigger::LocalDetection: return "local_detection";
    case Trigger::SwitchFrame: return "switch_frame";
    case Trigger::SilenceTimeout: return "silence_timeout";
    case Trigger::BeaconWaitTimeout: return "beacon_wait_timeout";
    case Trigger::TargetProbe: return "target_probe";
  }
  return "?";
}

ChannelAgent::ChannelAgent(NodeId self, Role role, const WnS& segment, SwitchConfig cfg, ChannelPort& port,
                           bool switching_enabled)
    : self_(self),
      role_(role),
      wns_id_(segment.id),
      channels_(segment.channels),
      params_(segment.params),
      cfg_(cfg),
      port_(port),
      switching_enabled_(switching_enabled),
      channel_(segment.channels.front()) {
  for (ChannelId c : channels_) status_[c];
  counter_.channel = channel_;
}

Frame ChannelAgent::make(FrameKind k, std::uint8_t seq, ChannelId payload_channel) const {
  Frame f;
  f.kind = k;
  f.seq = seq;
  f.src = self_;
  f.wns_id = wns_id_;
  f.payload = {static_cast<std::uint8_t>(payload_channel & 0xFFU), static_cast<std::uint8_t>(payload_channel >> 8)};
  return f;
}

void ChannelAgent::beacon_tick(std::uint64_t tick) {
  if (departed_ || role_ != Role::Coordinator || switching()) return;
  port_.send(self_, make(FrameKind::Beacon, static_cast<std::uint8_t>(tick & 0xFFU), channel_), true);
}

void ChannelAgent::observe_outcome(Outcome o) {
  counter_ = observe(std::move(counter_), o, port_.now(), params_.tau_rd);
}

bool ChannelAgent::counted_in(SimTime a, SimTime b) const {
  return last_corrupted_ && *last_corrupted_ >= a && *last_corrupted_ <= b;
}

void ChannelAgent::check_tick(SimTime tick_time) {
  if (departed_ || switching()) return;
  const SimTime now = port_.now();
  const bool seen = last_beacon_ && *last_beacon_ >= tick_time;
  const bool inaccessible = port_.inaccessible_during(tick_time, now);
  if (!inaccessible && !(!seen && counted_in(tick_time, now))) observe_outcome(seen ? Outcome::Ok : Outcome::Omission);

  if (probing_) {
    if (seen) {
      probing_ = false;
      port_.switch_completed(self_);
    } else if (!inaccessible) {
      trigger(Trigger::TargetProbe);
    }
    return;
  }
  if (!switching_enabled_) return;
  if (channel_failed(counter_, params_)) {
    trigger(Trigger::LocalDetection);
    return;
  }
  SimTime reference = last_heard_;
  if (auto ina = port_.last_inaccessibility_end(now)) reference = std::max(reference, *ina);
  state_.silence_timer = now - std::min(now, reference);
  if (state_.silence_timer > cfg_.t_silence) trigger(Trigger::SilenceTimeout);
}

void ChannelAgent::on_frame(const Frame& f) {
  if (departed_) return;
  last_heard_ = port_.now();
  if (f.kind == FrameKind::Beacon && f.payload.size() >= 2) {
    const ChannelId announced = static_cast<ChannelId>(f.payload[0] | (f.payload[1] << 8));
    if (announced != channel_) return;
    last_beacon_ = port_.now();
    if (role_ == Role::Member && switching() && channel_ == state_.target) {
      state_ = SwitchState{};
      ++wait_generation_;
      counter_ = OmissionCounter{channel_, 0, {}, port_.now()};
      port_.switch_completed(self_);
    }
    return;
  }
  if (f.kind == FrameKind::Switch && role_ == Role::Member && !switching() && switching_enabled_ &&
      f.payload.size() >= 2) {
    const ChannelId target = static_cast<ChannelId>(f.payload[0] | (f.payload[1] << 8));
    trigger(Trigger::SwitchFrame, target);
  }
}

void ChannelAgent::on_corrupted() {
  if (departed_ || switching()) return;
  last_corrupted_ = port_.now();
  observe_outcome(Outcome::Omission);
  if (switching_enabled_ && channel_failed(counter_, params_)) trigger(Trigger::LocalDetection);
}

void ChannelAgent::on_exchange(Outcome outcome, SimTime a, SimTime b) {
  if (departed_ || switching() || port_.inaccessible_during(a, b)) return;
  if (outcome == Outcome::Omission && counted_in(a, b)) return;
  observe_outcome(outcome);
  if (switching_enabled_ && channel_failed(counter_, params_)) trigger(Trigger::LocalDetection);
}

void ChannelAgent::rejoin(ChannelId c) {
  departed_ = false;
  probing_ = false;
  state_ = SwitchState{};
  ++wait_generation_;
  channel_ = c;
  port_.tune(self_, c);
  counter_ = OmissionCounter{c, 0, {}, port_.now()};
  last_heard_ = port_.now();
}

std::optional<ChannelId> ChannelAgent::next_usable(ChannelId from) const {
  ChannelId c = from;
  for (std::size_t n = 0; n < channels_.size(); ++n) {
    c = next_channel(c, channels_);
    if (!status_.at(c).failed()) return c;
  }
  return std::nullopt;
}

void ChannelAgent::fail_current(Trigger why) {
  auto& st = status_.at(channel_);
  if (!st.failed()) {
    st.failed_at = port_.now();
    port_.record(ev::ChannelFailed{channel_, self_, std::string(to_string(why))});
  }
}

void ChannelAgent::trigger(Trigger why, std::optional<ChannelId> target) {
  const bool retry = why == Trigger::BeaconWaitTimeout || why == Trigger::TargetProbe;
  if (departed_ || (switching() && !retry)) return;
  const bool was_idle = !switching() && !probing_;
  probing_ = false;
  fail_current(why);
  std::optional<ChannelId> next =
      (target && status_.contains(*target) && !status_.at(*target).failed()) ? target : next_usable(channel_);
  if (!next) {
    departed_ = true;
    port_.segment_failed("node " + std::to_string(self_) + ": all " + std::to_string(channels_.size()) +
                         " channels failed");
    return;
  }
  if (was_idle) port_.switch_started(self_);
  state_.mode = SwitchState::Mode::Switching;
  state_.target = *next;
  ++wait_generation_;

  if (role_ == Role::Coordinator) {
    Frame announce = make(FrameKind::Switch, 0, *next);
    for (std::uint32_t r = 0; r < cfg_.repetitions; ++r) {
      announce.seq = static_cast<std::uint8_t>(r);
      port_.send(self_, announce, false);
    }
    const SimTime announcing = cfg_.repetitions * airtime(announce);
    const ChannelId to = *next;
    port_.after(announcing, [this, to] { hop(to); });
  } else {
    hop(*next);
  }
}

void ChannelAgent::hop(ChannelId target) {
  const std::uint64_t gen = wait_generation_;
  port_.after(cfg_.hop_time, [this, target, gen] {
    if (departed_ || gen != wait_generation_) return;
    arrive(target);
  });
}

void ChannelAgent::arrive(ChannelId target) {
  const ChannelId from = channel_;
  channel_ = target;
  port_.tune(self_, target);
  port_.record(ev::ChannelSwitch{from, target, self_});
  counter_ = OmissionCounter{target, 0, {}, port_.now()};
  last_heard_ = port_.now();
  state_.deadline = port_.now() + cfg_.t_beacon_wait;
  if (role_ == Role::Coordinator) {
    state_ = SwitchState{};
    probing_ = true;
    port_.coordinator_arrived(target);
    return;
  }
  const std::uint64_t gen = wait_generation_;
  port_.after(cfg_.t_beacon_wait, [this, gen] {
    if (departed_ || gen != wait_generation_ || !switching()) return;
    trigger(Trigger::BeaconWaitTimeout);
  });
}

}  // namespace wnslab
