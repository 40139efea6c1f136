#pragma once

// Deterministic discrete-event model of the shared medium of one segment.
//
// Each channel carries at most one frame at a time; requests queue in
// (request time, node id, arrival) order. At TxEnd every member tuned to the
// channel and inside its broadcast domain gets an exact copy of the bytes
// unless the fault script destroys or corrupts it.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "wnslab/frame.hpp"
#include "wnslab/model.hpp"
#include "wnslab/trace.hpp"

namespace wnslab {

inline constexpr SimTime kSyncOverheadBytes = 6;
inline constexpr SimTime kSymbolsPerByte = 2;

SimTime airtime(const Frame& f);
SimTime airtime_for_length(std::size_t encoded_bytes);

enum class FaultMode {
  Destroy,     // no copy reaches the victims
  Corrupt,     // victims get the frame with one bit flipped
  Equivocate,  // victims get a different, well-formed frame
  Delay,       // victims get the copy `delay` symbols late
  Stall,       // the sender's access to the channel is held back `delay` symbols
};

std::string_view to_string(FaultMode m);
std::optional<FaultMode> fault_mode_from_string(std::string_view s);

/// Matches the first transmission with the given attributes; unset fields
/// are wildcards. A directive fires once.
struct OmissionDirective {
  std::optional<FrameKind> kind;
  std::optional<std::uint8_t> seq;
  std::optional<std::uint8_t> round;
  std::optional<NodeId> sender;
  std::optional<std::set<NodeId>> victims;  // nullopt = every recipient, sender included
  FaultMode mode = FaultMode::Destroy;
  SimTime delay = 0;
  friend bool operator==(const OmissionDirective&, const OmissionDirective&) = default;
};

struct Interval {
  SimTime start = 0;
  SimTime end = 0;
  bool overlaps(SimTime a, SimTime b) const { return start < b && a < end; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct ChannelFailureWindow {
  ChannelId channel = 0;
  Interval when;
  friend bool operator==(const ChannelFailureWindow&, const ChannelFailureWindow&) = default;
};

struct Move {
  NodeId node = 0;
  SimTime time = 0;
  Point position;
  friend bool operator==(const Move&, const Move&) = default;
};

struct FaultScript {
  std::vector<OmissionDirective> omissions;
  std::vector<ChannelFailureWindow> channel_failures;
  std::vector<Interval> inaccessibility;
  std::vector<Move> moves;
  friend bool operator==(const FaultScript&, const FaultScript&) = default;
};

/// Empty when well formed; otherwise one message per bad interval.
std::vector<std::string> validate(const FaultScript& s);

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Reception {
  TxId tx = 0;
  ChannelId channel = 0;
  NodeId src = 0;
  Bytes bytes;
};

/// Ablation switches for checker-sensitivity runs.
struct MediumOptions {
  bool drop_data_loopback = false;
};

class EventQueue {
 public:
  void schedule(SimTime at, std::function<void()> action);
  /// Runs every action with time <= until in (time, insertion) order.
  void run_until(SimTime until);
  SimTime now() const { return now_; }
  bool empty() const { return queue_.empty(); }

 private:
  struct Entry {
    SimTime time;
    std::uint64_t order;
    std::function<void()> action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.time != b.time ? a.time > b.time : a.order > b.order;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::uint64_t next_order_ = 0;
  SimTime now_ = 0;
};

class Medium {
 public:
  using ReceiveHandler = std::function<void(NodeId receiver, const Reception&)>;
  using MembershipHandler = std::function<void(NodeId node, bool joined)>;

  Medium(WnS segment, FaultScript faults, std::uint64_t seed, MediumOptions options = {});

  SimTime now() const { return events_.now(); }
  void schedule(SimTime at, std::function<void()> action);

  /// Queues a frame on channel `c`. Throws SimError for an unknown channel or
  /// a sender that is not a current member.
  TxId transmit(NodeId sender, const Frame& f, ChannelId c, bool loopback = false);

  /// Processes all events up to and including `t`; returns the number of
  /// trace records appended.
  std::size_t run_until(SimTime t);

  /// Moves a node now and commits any resulting membership changes.
  void apply_move(NodeId node, Point position);

  void tune(NodeId node, ChannelId c);
  ChannelId tuned(NodeId node) const;

  void on_receive(ReceiveHandler h) { receive_ = std::move(h); }
  void on_membership(MembershipHandler h) { membership_ = std::move(h); }

  /// True when a scripted inaccessibility window overlaps [a, b).
  bool inaccessible_during(SimTime a, SimTime b) const;
  std::vector<std::size_t> inaccessibility_overlapping(SimTime a, SimTime b) const;
  /// End of the latest scripted inaccessibility window that closed at or
  /// before `t`.
  std::optional<SimTime> last_inaccessibility_end(SimTime t) const;

  void record(TraceEvent e);
  std::uint32_t next_period_id() { return next_period_++; }

  const WnS& segment() const { return segment_; }
  const Node& node(NodeId id) const;
  bool is_current_member(NodeId id) const { return segment_.members.contains(id); }
  const Trace& trace() const { return trace_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  struct Request {
    SimTime requested;
    NodeId sender;
    std::uint64_t arrival;
    TxId tx;
    Frame frame;
    bool loopback;
  };
  struct ChannelState {
    std::vector<Request> waiting;
    bool busy = false;
    bool arbitration_pending = false;
  };

  void enqueue(ChannelId c, Request r);
  void arbitrate(ChannelId c);
  void finish(ChannelId c, const Request& r, SimTime start);
  void deliver(NodeId receiver, const Reception& rx);
  OmissionDirective* match_directive(const Frame& f, bool stall);
  void reevaluate_membership(NodeId moved_node);

  WnS segment_;
  FaultScript faults_;
  std::vector<bool> directive_used_;
  MediumOptions options_;
  std::map<NodeId, Node> nodes_;  // every node ever in the segment
  std::map<NodeId, ChannelId> tuned_;
  std::map<ChannelId, ChannelState> channels_;
  EventQueue events_;
  Trace trace_;
  std::mt19937_64 rng_;
  ReceiveHandler receive_;
  MembershipHandler membership_;
  TxId next_tx_ = 0;
  std::uint64_t next_arrival_ = 0;
  std::uint32_t next_period_ = 0;
};

}  // namespace wnslab
