#include "wnslab/mediator.hpp"

#include <algorithm>

#include "wnslab/medium.hpp"

namespace wnslab {

SimTime wc_bound(const WnSParams& p) { return static_cast<SimTime>(max_rounds(p)) * 2 * p.tau_td + p.tau_ina; }

std::uint32_t max_rounds(const WnSParams& p) { return p.k + p.i + 1; }

SimTime confirm_slot() { return airtime_for_length(kMinFrameBytes + 2) + 2; }

std::vector<std::string> round_fits(const WnSParams& p, std::size_t max_payload, std::size_t receivers) {
  std::vector<std::string> out;
  if (beacon_slot() + airtime_for_length(kMinFrameBytes + max_payload) > p.tau_td) {
    out.emplace_back("beacon + DATA of " + std::to_string(max_payload) + " bytes exceeds tau_td");
  }
  if (beacon_slot() + static_cast<SimTime>(receivers) * confirm_slot() > p.tau_td) {
    out.emplace_back("beacon + " + std::to_string(receivers) + " confirm slots exceed tau_td");
  }
  return out;
}

Mediator::Mediator(const WnS& segment, MediatorPort& port)
    : wns_id_(segment.id), params_(segment.params), port_(port) {}

MessageId Mediator::send(NodeId src, Bytes payload, std::optional<SimTime> deadline) {
  if (payload.size() > kMaxPayload) throw MediatorError("message payload exceeds a single frame");
  const MessageId id{src, next_seq_[src]++};
  const SimTime now = port_.now();
  Request r{Message{id, std::move(payload), deadline}, now};
  auto pos = std::find_if(queue_.begin(), queue_.end(), [&](const Request& q) {
    return q.requested > r.requested || (q.requested == r.requested && q.message.id.src > src);
  });
  queue_.insert(pos, std::move(r));
  return id;
}

void Mediator::cycle_start(SimTime s) {
  if (round_running_) return;
  if (!active_ && !queue_.empty() && queue_.front().requested <= s) {
    Request r = std::move(queue_.front());
    queue_.pop_front();
    XmitState x;
    x.id = r.message.id;
    x.started = s;
    x.requested = r.requested;
    const auto members = port_.members();
    for (NodeId m : members) {
      if (m != x.id.src) x.receivers.push_back(m);
    }
    x.pending.insert(x.receivers.begin(), x.receivers.end());
    port_.record(ev::MsgStart{x.id.src, x.id.seq, x.requested, x.receivers});
    active_ = std::move(x);
    active_payload_ = std::move(r.message.payload);
    if (std::find(members.begin(), members.end(), active_->id.src) == members.end()) {
      finish(false, "sender is not a member");
      return;
    }
    if (r.message.deadline && *r.message.deadline < s + wc_bound(params_)) {
      finish(false, "deadline infeasible");
      return;
    }
  }
  if (active_) start_round(s);
}

void Mediator::start_round(SimTime s) {
  round_running_ = true;
  round_interrupted_ = false;
  round_start_ = s;
  round_expected_ = active_->pending;
  const std::uint64_t token = ++round_token_;
  Frame data;
  data.kind = FrameKind::Data;
  data.seq = active_->id.seq;
  data.round = static_cast<std::uint8_t>(active_->round);
  data.src = active_->id.src;
  data.wns_id = wns_id_;
  data.payload = active_payload_;
  port_.at(s + beacon_slot(), [this, token, data] {
    if (token == round_token_ && port_.reachable(data.src)) port_.send(data.src, data, true);
  });
  port_.at(s + 2 * params_.tau_td, [this, token] { end_round(token); });
}

void Mediator::end_round(std::uint64_t token) {
  if (token != round_token_ || !active_) return;
  round_running_ = false;
  if (round_interrupted_) return;  // the same round runs again after the blackout
  const auto members = port_.members();
  auto is_member = [&](NodeId n) { return std::find(members.begin(), members.end(), n) != members.end(); };
  std::erase_if(active_->pending, [&](NodeId n) { return !is_member(n); });
  bool all_confirmed = true;
  for (NodeId n : round_expected_) {
    if (is_member(n) && active_->pending.contains(n)) all_confirmed = false;
  }
  port_.exchange(active_->id.src, all_confirmed ? Outcome::Ok : Outcome::Omission, round_start_, port_.now());
  // a period already charged for an earlier round is not charged again
  const auto periods = port_.inaccessibility_overlapping(round_start_, port_.now());
  const bool recharged = !periods.empty() && std::all_of(periods.begin(), periods.end(), [&](std::size_t p) {
    return active_->charged.contains(p);
  });
  active_->charged.insert(periods.begin(), periods.end());
  if (active_->pending.empty()) {
    finish(true, "");
  } else if (recharged) {
    return;
  } else if (active_->round >= max_rounds(params_)) {
    finish(false, "rounds exhausted");
  } else {
    ++active_->round;
  }
}

void Mediator::finish(bool success, const std::string& why) {
  XmitState x = std::move(*active_);
  active_.reset();
  round_running_ = false;
  ++round_token_;
  x.outcome = success ? XmitState::Outcome::Success : XmitState::Outcome::Failure;
  x.finished = port_.now();
  x.failure = why;
  port_.record(ev::MsgDone{x.id.src, x.id.seq, success, x.round, x.finished - x.started, why});
  finished_.push_back(std::move(x));
}

void Mediator::blackout_started() {
  if (round_running_) round_interrupted_ = true;
}

void Mediator::frame_received(NodeId receiver, const Frame& f) {
  if (!active_) return;
  const MessageId id = active_->id;
  if (f.kind == FrameKind::Data) {
    if (f.src != id.src || f.seq != id.seq || receiver == id.src) return;
    auto it = std::find(active_->receivers.begin(), active_->receivers.end(), receiver);
    if (it == active_->receivers.end()) return;
    if (delivered_.insert({receiver, id}).second) {
      DeliveryRecord d{receiver, id, port_.now(), f.round};
      deliveries_.push_back(d);
      port_.record(ev::MsgDeliver{receiver, id.src, id.seq, f.round});
      for (auto& cb : deliver_) cb(d, f.payload);
    }
    const auto index = static_cast<SimTime>(it - active_->receivers.begin());
    const SimTime slot = round_start_ + params_.tau_td + beacon_slot() + index * confirm_slot();
    if (!round_running_ || slot < port_.now()) return;
    Frame confirm;
    confirm.kind = FrameKind::Confirm;
    confirm.seq = f.seq;
    confirm.round = f.round;
    confirm.src = receiver;
    confirm.wns_id = wns_id_;
    confirm.payload = {static_cast<std::uint8_t>(id.src & 0xFFU), static_cast<std::uint8_t>(id.src >> 8)};
    const std::uint64_t token = round_token_;
    port_.at(slot, [this, token, receiver, confirm] {
      if (token == round_token_ && port_.reachable(receiver)) port_.send(receiver, confirm, false);
    });
    return;
  }
  if (f.kind == FrameKind::Confirm && receiver == id.src && f.seq == id.seq && f.payload.size() >= 2) {
    const NodeId addressed = static_cast<NodeId>(f.payload[0] | (f.payload[1] << 8));
    if (addressed == id.src) active_->pending.erase(f.src);
  }
}

void Mediator::member_left(NodeId node) {
  if (!active_) return;
  if (node == active_->id.src) {
    finish(false, "sender departed");
    return;
  }
  active_->pending.erase(node);
}

}  // namespace wnslab
