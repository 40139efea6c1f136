#include "wnslab/medium.hpp"

#include <algorithm>

namespace wnslab {

SimTime airtime_for_length(std::size_t encoded_bytes) {
  return kSymbolsPerByte * (kSyncOverheadBytes + static_cast<SimTime>(encoded_bytes));
}

SimTime airtime(const Frame& f) { return airtime_for_length(encoded_length(f)); }

std::string_view to_string(FaultMode m) {
  switch (m) {
    case FaultMode::Destroy: return "destroy";
    case FaultMode::Corrupt: return "corrupt";
    case FaultMode::Equivocate: return "equivocate";
    case FaultMode::Delay: return "delay";
    case FaultMode::Stall: return "stall";
  }
  return "?";
}

std::optional<FaultMode> fault_mode_from_string(std::string_view s) {
  for (auto m : {FaultMode::Destroy, FaultMode::Corrupt, FaultMode::Equivocate, FaultMode::Delay,
                 FaultMode::Stall}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::vector<std::string> validate(const FaultScript& s) {
  std::vector<std::string> out;
  for (const auto& w : s.channel_failures) {
    if (w.when.start >= w.when.end) out.emplace_back("channel failure interval start < end");
  }
  for (const auto& w : s.inaccessibility) {
    if (w.start >= w.end) out.emplace_back("inaccessibility interval start < end");
  }
  for (const auto& d : s.omissions) {
    if ((d.mode == FaultMode::Delay || d.mode == FaultMode::Stall) && d.delay == 0) {
      out.emplace_back("delay/stall directive needs delay > 0");
    }
  }
  return out;
}

void EventQueue::schedule(SimTime at, std::function<void()> action) {
  if (at < now_) throw SimError("event scheduled in the past");
  queue_.push(Entry{at, next_order_++, std::move(action)});
}

void EventQueue::run_until(SimTime until) {
  if (until < now_) throw SimError("run_until target precedes the current time");
  while (!queue_.empty() && queue_.top().time <= until) {
    // Copy out before pop: the action may schedule more events.
    Entry e = queue_.top();
    queue_.pop();
    now_ = e.time;
    e.action();
  }
  now_ = until;
}

Medium::Medium(WnS segment, FaultScript faults, std::uint64_t seed, MediumOptions options)
    : segment_(std::move(segment)),
      faults_(std::move(faults)),
      directive_used_(faults_.omissions.size(), false),
      options_(options),
      rng_(seed) {
  if (auto bad = validate(faults_); !bad.empty()) throw SimError("fault script: " + bad.front());
  if (segment_.channels.empty()) throw SimError("segment has no channels");
  for (const auto& [id, n] : segment_.members) {
    nodes_.emplace(id, n);
    tuned_[id] = segment_.channels.front();
  }
  for (ChannelId c : segment_.channels) channels_[c];
  for (const auto& w : faults_.inaccessibility) {
    const std::uint32_t period = next_period_id();
    schedule(w.start, [this, period] { record(ev::InaccessStart{period, ev::InaCause::Injected}); });
    schedule(w.end, [this, period] { record(ev::InaccessEnd{period}); });
  }
  for (const auto& m : faults_.moves) {
    if (!nodes_.contains(m.node)) throw SimError("move of unknown node " + std::to_string(m.node));
    schedule(m.time, [this, m] { apply_move(m.node, m.position); });
  }
}

void Medium::schedule(SimTime at, std::function<void()> action) { events_.schedule(at, std::move(action)); }

void Medium::record(TraceEvent e) {
  trace_.push_back(TraceRecord{trace_.size(), now(), std::move(e)});
}

const Node& Medium::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw SimError("unknown node " + std::to_string(id));
  return it->second;
}

void Medium::tune(NodeId node, ChannelId c) {
  if (!channels_.contains(c)) throw SimError("tune to unknown channel " + std::to_string(c));
  tuned_[node] = c;
}

ChannelId Medium::tuned(NodeId node) const {
  auto it = tuned_.find(node);
  if (it == tuned_.end()) throw SimError("unknown node " + std::to_string(node));
  return it->second;
}

bool Medium::inaccessible_during(SimTime a, SimTime b) const {
  return std::any_of(faults_.inaccessibility.begin(), faults_.inaccessibility.end(),
                     [&](const Interval& w) { return w.overlaps(a, b); });
}

std::vector<std::size_t> Medium::inaccessibility_overlapping(SimTime a, SimTime b) const {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < faults_.inaccessibility.size(); ++n) {
    if (faults_.inaccessibility[n].overlaps(a, b)) out.push_back(n);
  }
  return out;
}

std::optional<SimTime> Medium::last_inaccessibility_end(SimTime t) const {
  std::optional<SimTime> best;
  for (const auto& w : faults_.inaccessibility) {
    if (w.end <= t && (!best || w.end > *best)) best = w.end;
  }
  return best;
}

OmissionDirective* Medium::match_directive(const Frame& f, bool stall) {
  for (std::size_t i = 0; i < faults_.omissions.size(); ++i) {
    auto& d = faults_.omissions[i];
    if (directive_used_[i] || (d.mode == FaultMode::Stall) != stall) continue;
    if (d.kind && *d.kind != f.kind) continue;
    if (d.seq && *d.seq != f.seq) continue;
    if (d.round && *d.round != f.round) continue;
    if (d.sender && *d.sender != f.src) continue;
    directive_used_[i] = true;
    return &d;
  }
  return nullptr;
}

TxId Medium::transmit(NodeId sender, const Frame& f, ChannelId c, bool loopback) {
  if (!channels_.contains(c)) throw SimError("transmit on unknown channel " + std::to_string(c));
  if (!is_current_member(sender)) throw SimError("transmit by non-member " + std::to_string(sender));
  if (f.payload.size() > kMaxPayload) throw SimError("oversize payload");
  const TxId tx = next_tx_++;
  Request r{now(), sender, next_arrival_++, tx, f, loopback};
  if (const auto* stall = match_directive(f, true)) {
    record(ev::Tampered{r.tx, "stall", {sender}});
    schedule(now() + stall->delay, [this, c, r] { enqueue(c, r); });
  } else {
    enqueue(c, std::move(r));
  }
  return tx;
}

void Medium::enqueue(ChannelId c, Request r) {
  auto& ch = channels_.at(c);
  ch.waiting.push_back(std::move(r));
  if (!ch.busy && !ch.arbitration_pending) {
    ch.arbitration_pending = true;
    // Deferred so that every request issued at this instant competes.
    schedule(now(), [this, c] { arbitrate(c); });
  }
}

void Medium::arbitrate(ChannelId c) {
  auto& ch = channels_.at(c);
  ch.arbitration_pending = false;
  if (ch.busy || ch.waiting.empty()) return;
  auto first = std::min_element(ch.waiting.begin(), ch.waiting.end(), [](const Request& a, const Request& b) {
    if (a.requested != b.requested) return a.requested < b.requested;
    if (a.sender != b.sender) return a.sender < b.sender;
    return a.arrival < b.arrival;
  });
  Request r = std::move(*first);
  ch.waiting.erase(first);
  ch.busy = true;
  const SimTime start = now();
  record(ev::TxStart{r.tx, c, r.frame.src, r.frame.kind, r.frame.seq, r.frame.round, r.requested,
                     r.loopback, encode(r.frame)});
  schedule(start + airtime(r.frame), [this, c, r, start] { finish(c, r, start); });
}

void Medium::finish(ChannelId c, const Request& r, SimTime start) {
  const SimTime end = now();
  record(ev::TxEnd{r.tx, c});

  std::vector<NodeId> recipients;
  for (const auto& [id, n] : segment_.members) {
    if (id == r.sender) {
      const bool dropped = options_.drop_data_loopback && r.frame.kind == FrameKind::Data;
      if (r.loopback && !dropped) recipients.push_back(id);
      continue;
    }
    if (tuned_.at(id) == c && broadcast_domain_contains(n.position, c, segment_)) recipients.push_back(id);
  }

  const Bytes bytes = encode(r.frame);
  const Reception clean{r.tx, c, r.sender, bytes};

  const bool failed = std::any_of(faults_.channel_failures.begin(), faults_.channel_failures.end(),
                                  [&](const ChannelFailureWindow& w) { return w.channel == c && w.when.overlaps(start, end); });
  if (failed || inaccessible_during(start, end)) {
    record(ev::OmissionInjected{r.tx, c, failed ? ev::OmissionCause::ChannelFailure : ev::OmissionCause::Inaccessibility,
                                false, recipients});
  } else if (const OmissionDirective* d = match_directive(r.frame, false)) {
    std::vector<NodeId> victims;
    std::vector<NodeId> spared;
    for (NodeId id : recipients) {
      const bool hit = !d->victims || d->victims->contains(id);
      (hit ? victims : spared).push_back(id);
    }
    switch (d->mode) {
      case FaultMode::Destroy:
      case FaultMode::Corrupt: {
        const bool corrupt = d->mode == FaultMode::Corrupt;
        if (!victims.empty()) record(ev::OmissionInjected{r.tx, c, ev::OmissionCause::Directive, corrupt, victims});
        for (NodeId id : recipients) {
          const bool hit = std::find(victims.begin(), victims.end(), id) != victims.end();
          if (!hit) {
            deliver(id, clean);
          } else if (corrupt) {
            Reception bad = clean;
            std::uniform_int_distribution<std::size_t> bit(0, bad.bytes.size() * 8 - 1);
            const std::size_t pos = bit(rng_);
            bad.bytes[pos / 8] ^= static_cast<std::uint8_t>(1U << (pos % 8));
            deliver(id, bad);
          }
        }
        break;
      }
      case FaultMode::Equivocate: {
        if (!victims.empty()) record(ev::Tampered{r.tx, "equivocate", victims});
        Frame other = r.frame;
        if (other.payload.empty()) {
          other.seq ^= 0x80U;
        } else {
          other.payload.front() ^= 0xFFU;
        }
        const Reception forged{r.tx, c, r.sender, encode(other)};
        for (NodeId id : recipients) {
          const bool hit = std::find(victims.begin(), victims.end(), id) != victims.end();
          deliver(id, hit ? forged : clean);
        }
        break;
      }
      case FaultMode::Delay: {
        if (!victims.empty()) record(ev::Tampered{r.tx, "delay", victims});
        for (NodeId id : spared) deliver(id, clean);
        for (NodeId id : victims) {
          schedule(end + d->delay, [this, id, clean] {
            if (is_current_member(id)) deliver(id, clean);
          });
        }
        break;
      }
      case FaultMode::Stall:
        break;  // never matched here
    }
  } else {
    for (NodeId id : recipients) deliver(id, clean);
  }

  auto& ch = channels_.at(c);
  ch.busy = false;
  if (!ch.waiting.empty() && !ch.arbitration_pending) {
    ch.arbitration_pending = true;
    schedule(now(), [this, c] { arbitrate(c); });
  }
}

void Medium::deliver(NodeId receiver, const Reception& rx) {
  record(ev::Deliver{rx.tx, rx.channel, receiver, rx.bytes});
  if (receive_) receive_(receiver, rx);
}

void Medium::apply_move(NodeId node, Point position) {
  auto it = nodes_.find(node);
  if (it == nodes_.end()) throw SimError("move of unknown node " + std::to_string(node));
  it->second = moved(it->second, position);
  if (auto m = segment_.members.find(node); m != segment_.members.end()) m->second = it->second;
  reevaluate_membership(node);
}

void Medium::reevaluate_membership(NodeId moved_node) {
  // The moved node is judged first; each leave enlarges the domain, so the
  // remaining members are judged one at a time against the updated segment.
  auto leave = [this](NodeId id) {
    segment_ = commit_membership(std::move(segment_), Leave{id});
    record(ev::MembershipChange{id, false});
    if (membership_) membership_(id, false);
  };
  if (auto it = segment_.members.find(moved_node);
      it != segment_.members.end() && moved_node != segment_.coordinator_id && !is_member(it->second, segment_)) {
    leave(moved_node);
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [id, n] : segment_.members) {
      if (id != segment_.coordinator_id && !is_member(n, segment_)) {
        leave(id);
        changed = true;
        break;
      }
    }
  }
  std::vector<NodeId> joining;
  for (const auto& [id, n] : nodes_) {
    if (!segment_.members.contains(id) && is_member(n, segment_)) joining.push_back(id);
  }
  for (NodeId id : joining) {
    segment_ = commit_membership(std::move(segment_), Join{nodes_.at(id)});
    record(ev::MembershipChange{id, true});
    if (membership_) membership_(id, true);
  }
}

std::size_t Medium::run_until(SimTime t) {
  const std::size_t before = trace_.size();
  events_.run_until(t);
  return trace_.size() - before;
}

}  // namespace wnslab
