#pragma once

// Globally ordered simulation records and their line-delimited JSON form.
// Field names and order are stable; two identical runs produce identical
// files.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wnslab/frame.hpp"
#include "wnslab/model.hpp"

namespace wnslab {

using TxId = std::uint64_t;

namespace ev {

struct TxStart {
  TxId tx = 0;
  ChannelId channel = 0;
  NodeId src = 0;
  FrameKind kind = FrameKind::Data;
  std::uint8_t seq = 0;
  std::uint8_t round = 0;
  SimTime requested = 0;
  bool loopback = false;
  Bytes bytes;
};
struct TxEnd {
  TxId tx = 0;
  ChannelId channel = 0;
};
struct Deliver {
  TxId tx = 0;
  ChannelId channel = 0;
  NodeId receiver = 0;
  Bytes bytes;
};
enum class OmissionCause { Directive, ChannelFailure, Inaccessibility };
struct OmissionInjected {
  TxId tx = 0;
  ChannelId channel = 0;
  OmissionCause cause = OmissionCause::Directive;
  bool corrupt = false;  // delivered with flipped bits instead of destroyed
  std::vector<NodeId> victims;
};
/// Adversarial medium behaviour outside the omission model (equivocation,
/// delayed delivery, stalled access); only bundled sensitivity scenarios use it.
struct Tampered {
  TxId tx = 0;
  std::string mode;
  std::vector<NodeId> victims;
};
struct SignalEmitted {
  TxId tx = 0;
  OmissionSignal signal;
};
enum class InaCause { Injected, Switch };
struct InaccessStart {
  std::uint32_t period = 0;
  InaCause cause = InaCause::Injected;
};
struct InaccessEnd {
  std::uint32_t period = 0;
};
struct ChannelFailed {
  ChannelId channel = 0;
  NodeId node = 0;
  std::string reason;
};
struct ChannelSwitch {
  ChannelId from = 0;
  ChannelId to = 0;
  NodeId node = 0;
};
struct MembershipChange {
  NodeId node = 0;
  bool joined = false;
};
struct MsgStart {
  NodeId src = 0;
  std::uint8_t seq = 0;
  SimTime requested = 0;
  std::vector<NodeId> receivers;
};
struct MsgDeliver {
  NodeId receiver = 0;
  NodeId src = 0;
  std::uint8_t seq = 0;
  std::uint8_t round = 0;
};
struct MsgDone {
  NodeId src = 0;
  std::uint8_t seq = 0;
  bool success = false;
  std::uint32_t rounds = 0;
  SimTime elapsed = 0;
  std::string detail;
};
struct SegmentFailure {
  std::string reason;
};

}  // namespace ev

using TraceEvent =
    std::variant<ev::TxStart, ev::TxEnd, ev::Deliver, ev::OmissionInjected, ev::Tampered,
                 ev::SignalEmitted, ev::InaccessStart, ev::InaccessEnd, ev::ChannelFailed,
                 ev::ChannelSwitch, ev::MembershipChange, ev::MsgStart, ev::MsgDeliver, ev::MsgDone,
                 ev::SegmentFailure>;

struct TraceRecord {
  std::uint64_t index = 0;
  SimTime time = 0;
  TraceEvent event;
};

using Trace = std::vector<TraceRecord>;

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::string_view event_name(const TraceEvent& e);
std::string to_line(const TraceRecord& r);
TraceRecord parse_line(std::string_view line, std::size_t line_no = 0);

void write_trace(std::ostream& out, const Trace& trace);
/// Also checks that indices strictly increase and times never decrease.
Trace read_trace(std::istream& in);

}  // namespace wnslab
