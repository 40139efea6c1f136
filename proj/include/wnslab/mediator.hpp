#pragma once

// Reliable real-time broadcast over the segment.
//
// Time is cut into cycles of 2*tau_td that start with a coordinator beacon.
// A round occupies one cycle: the sender's DATA frame follows the opening
// beacon, and the second half (after the mid-cycle beacon) holds one CONFIRM
// slot per receiver in ascending id order. A round in which every pending
// receiver confirmed ends the protocol; otherwise the DATA is repeated in the
// next cycle, up to k+i+1 rounds. Without faults a message completes in
// exactly one cycle, 2*tau_td after initiation.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wnslab/channel_layer.hpp"
#include "wnslab/frame.hpp"
#include "wnslab/model.hpp"
#include "wnslab/trace.hpp"

namespace wnslab {

struct MessageId {
  NodeId src = 0;
  std::uint8_t seq = 0;
  auto operator<=>(const MessageId&) const = default;
};

struct Message {
  MessageId id;
  Bytes payload;
  std::optional<SimTime> deadline;  // latest acceptable completion
};

struct XmitState {
  enum class Outcome { InProgress, Success, Failure };
  MessageId id;
  std::uint32_t round = 1;
  std::set<NodeId> pending;
  std::vector<NodeId> receivers;  // membership snapshot at initiation, ascending
  Outcome outcome = Outcome::InProgress;
  SimTime started = 0;
  SimTime requested = 0;
  SimTime finished = 0;
  std::string failure;
  std::set<std::size_t> charged;  // inaccessibility periods that already cost a round
};

struct DeliveryRecord {
  NodeId receiver = 0;
  MessageId message;
  SimTime time = 0;
  std::uint32_t round_received = 0;
};

class MediatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (k+i+1) * 2*tau_td + tau_ina
SimTime wc_bound(const WnSParams& p);
std::uint32_t max_rounds(const WnSParams& p);

/// Airtime of a CONFIRM (2-byte payload) plus the 2-symbol guard.
SimTime confirm_slot();

/// Checks that a DATA frame of `max_payload` bytes and `receivers` confirm
/// slots fit the two halves of a cycle. Empty when they do.
std::vector<std::string> round_fits(const WnSParams& p, std::size_t max_payload, std::size_t receivers);

class MediatorPort {
 public:
  virtual ~MediatorPort() = default;
  virtual SimTime now() const = 0;
  virtual void send(NodeId node, const Frame& f, bool loopback) = 0;
  virtual void at(SimTime t, std::function<void()> action) = 0;
  virtual void record(TraceEvent e) = 0;
  virtual void exchange(NodeId node, Outcome outcome, SimTime a, SimTime b) = 0;
  virtual std::vector<NodeId> members() const = 0;
  virtual bool reachable(NodeId node) const = 0;  // member, not mid-switch
  /// Ids of injected inaccessibility periods overlapping [a, b).
  virtual std::vector<std::size_t> inaccessibility_overlapping(SimTime a, SimTime b) const = 0;
};

class Mediator {
 public:
  using DeliverCallback = std::function<void(const DeliveryRecord&, const Bytes& payload)>;

  Mediator(const WnS& segment, MediatorPort& port);

  /// Queues a message; returns its id. Throws MediatorError for an oversize
  /// payload.
  MessageId send(NodeId src, Bytes payload, std::optional<SimTime> deadline = std::nullopt);
  void on_deliver(DeliverCallback cb) { deliver_.push_back(std::move(cb)); }

  /// Called at the start of every cycle (the opening beacon time).
  void cycle_start(SimTime s);
  void blackout_started();
  void frame_received(NodeId receiver, const Frame& f);
  void member_left(NodeId node);

  bool idle() const { return !active_ && queue_.empty(); }
  const std::optional<XmitState>& active() const { return active_; }
  const std::vector<XmitState>& finished() const { return finished_; }
  const std::vector<DeliveryRecord>& deliveries() const { return deliveries_; }

 private:
  struct Request {
    Message message;
    SimTime requested;
  };

  void start_round(SimTime s);
  void end_round(std::uint64_t round_token);
  void finish(bool success, const std::string& why);

  std::uint16_t wns_id_;
  WnSParams params_;
  MediatorPort& port_;
  std::vector<DeliverCallback> deliver_;
  std::deque<Request> queue_;
  std::map<NodeId, std::uint8_t> next_seq_;
  std::optional<XmitState> active_;
  Bytes active_payload_;
  bool round_running_ = false;
  bool round_interrupted_ = false;
  SimTime round_start_ = 0;
  std::set<NodeId> round_expected_;
  std::uint64_t round_token_ = 0;
  std::set<std::pair<NodeId, MessageId>> delivered_;
  std::vector<XmitState> finished_;
  std::vector<DeliveryRecord> deliveries_;
};

}  // namespace wnslab
