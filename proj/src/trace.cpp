#include "wnslab/trace.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace wnslab {
namespace {

using Json = nlohmann::ordered_json;

std::string_view cause_name(ev::OmissionCause c) {
  switch (c) {
    case ev::OmissionCause::Directive: return "directive";
    case ev::OmissionCause::ChannelFailure: return "channel_failure";
    case ev::OmissionCause::Inaccessibility: return "inaccessibility";
  }
  return "?";
}

ev::OmissionCause cause_from(const std::string& s) {
  if (s == "directive") return ev::OmissionCause::Directive;
  if (s == "channel_failure") return ev::OmissionCause::ChannelFailure;
  if (s == "inaccessibility") return ev::OmissionCause::Inaccessibility;
  throw std::invalid_argument("unknown omission cause '" + s + "'");
}

std::string_view ina_name(ev::InaCause c) { return c == ev::InaCause::Injected ? "injected" : "switch"; }

ev::InaCause ina_from(const std::string& s) {
  if (s == "injected") return ev::InaCause::Injected;
  if (s == "switch") return ev::InaCause::Switch;
  throw std::invalid_argument("unknown inaccessibility cause '" + s + "'");
}

struct Writer {
  Json& j;
  void operator()(const ev::TxStart& e) const {
    j["tx"] = e.tx;
    j["ch"] = e.channel;
    j["src"] = e.src;
    j["kind"] = to_string(e.kind);
    j["seq"] = e.seq;
    j["round"] = e.round;
    j["requested"] = e.requested;
    j["loopback"] = e.loopback;
    j["bytes"] = to_hex(e.bytes);
  }
  void operator()(const ev::TxEnd& e) const {
    j["tx"] = e.tx;
    j["ch"] = e.channel;
  }
  void operator()(const ev::Deliver& e) const {
    j["tx"] = e.tx;
    j["ch"] = e.channel;
    j["receiver"] = e.receiver;
    j["bytes"] = to_hex(e.bytes);
  }
  void operator()(const ev::OmissionInjected& e) const {
    j["tx"] = e.tx;
    j["ch"] = e.channel;
    j["cause"] = cause_name(e.cause);
    j["corrupt"] = e.corrupt;
    j["victims"] = e.victims;
  }
  void operator()(const ev::Tampered& e) const {
    j["tx"] = e.tx;
    j["mode"] = e.mode;
    j["victims"] = e.victims;
  }
  void operator()(const ev::SignalEmitted& e) const {
    j["tx"] = e.tx;
    j["ch"] = e.signal.channel;
    j["observer"] = e.signal.observer;
    j["reason"] = to_string(e.signal.reason);
    j["at"] = e.signal.time;
  }
  void operator()(const ev::InaccessStart& e) const {
    j["period"] = e.period;
    j["cause"] = ina_name(e.cause);
  }
  void operator()(const ev::InaccessEnd& e) const { j["period"] = e.period; }
  void operator()(const ev::ChannelFailed& e) const {
    j["ch"] = e.channel;
    j["node"] = e.node;
    j["reason"] = e.reason;
  }
  void operator()(const ev::ChannelSwitch& e) const {
    j["from"] = e.from;
    j["to"] = e.to;
    j["node"] = e.node;
  }
  void operator()(const ev::MembershipChange& e) const {
    j["node"] = e.node;
    j["joined"] = e.joined;
  }
  void operator()(const ev::MsgStart& e) const {
    j["src"] = e.src;
    j["seq"] = e.seq;
    j["requested"] = e.requested;
    j["receivers"] = e.receivers;
  }
  void operator()(const ev::MsgDeliver& e) const {
    j["receiver"] = e.receiver;
    j["src"] = e.src;
    j["seq"] = e.seq;
    j["round"] = e.round;
  }
  void operator()(const ev::MsgDone& e) const {
    j["src"] = e.src;
    j["seq"] = e.seq;
    j["success"] = e.success;
    j["rounds"] = e.rounds;
    j["elapsed"] = e.elapsed;
    j["detail"] = e.detail;
  }
  void operator()(const ev::SegmentFailure& e) const { j["reason"] = e.reason; }
};

FrameKind kind_from(const std::string& s) {
  auto k = frame_kind_from_string(s);
  if (!k) throw std::invalid_argument("unknown frame kind '" + s + "'");
  return *k;
}

TraceEvent read_event(const std::string& name, const Json& j) {
  if (name == "TxStart") {
    return ev::TxStart{j.at("tx"),        j.at("ch"),       j.at("src"),
                       kind_from(j.at("kind")), j.at("seq"), j.at("round"),
                       j.at("requested"), j.at("loopback"), from_hex(j.at("bytes").get<std::string>())};
  }
  if (name == "TxEnd") return ev::TxEnd{j.at("tx"), j.at("ch")};
  if (name == "Deliver") {
    return ev::Deliver{j.at("tx"), j.at("ch"), j.at("receiver"), from_hex(j.at("bytes").get<std::string>())};
  }
  if (name == "OmissionInjected") {
    return ev::OmissionInjected{j.at("tx"), j.at("ch"), cause_from(j.at("cause")), j.at("corrupt"),
                                j.at("victims").get<std::vector<NodeId>>()};
  }
  if (name == "Tampered") {
    return ev::Tampered{j.at("tx"), j.at("mode"), j.at("victims").get<std::vector<NodeId>>()};
  }
  if (name == "SignalEmitted") {
    auto reason = omission_reason_from_string(j.at("reason").get<std::string>());
    if (!reason) throw std::invalid_argument("unknown signal reason");
    return ev::SignalEmitted{j.at("tx"), OmissionSignal{j.at("ch"), j.at("at"), j.at("observer"), *reason}};
  }
  if (name == "InaccessStart") return ev::InaccessStart{j.at("period"), ina_from(j.at("cause"))};
  if (name == "InaccessEnd") return ev::InaccessEnd{j.at("period")};
  if (name == "ChannelFailed") return ev::ChannelFailed{j.at("ch"), j.at("node"), j.at("reason")};
  if (name == "ChannelSwitch") return ev::ChannelSwitch{j.at("from"), j.at("to"), j.at("node")};
  if (name == "MembershipChange") return ev::MembershipChange{j.at("node"), j.at("joined")};
  if (name == "MsgStart") {
    return ev::MsgStart{j.at("src"), j.at("seq"), j.at("requested"),
                        j.at("receivers").get<std::vector<NodeId>>()};
  }
  if (name == "MsgDeliver") return ev::MsgDeliver{j.at("receiver"), j.at("src"), j.at("seq"), j.at("round")};
  if (name == "MsgDone") {
    return ev::MsgDone{j.at("src"),    j.at("seq"),     j.at("success"),
                       j.at("rounds"), j.at("elapsed"), j.at("detail")};
  }
  if (name == "SegmentFailure") return ev::SegmentFailure{j.at("reason")};
  throw std::invalid_argument("unknown event '" + name + "'");
}

}  // namespace

std::string_view event_name(const TraceEvent& e) {
  static constexpr std::string_view kNames[] = {
      "TxStart",   "TxEnd",         "Deliver",      "OmissionInjected", "Tampered",
      "SignalEmitted", "InaccessStart", "InaccessEnd", "ChannelFailed",  "ChannelSwitch",
      "MembershipChange", "MsgStart", "MsgDeliver",  "MsgDone",          "SegmentFailure"};
  static_assert(std::size(kNames) == std::variant_size_v<TraceEvent>);
  return kNames[e.index()];
}

std::string to_line(const TraceRecord& r) {
  Json j;
  j["i"] = r.index;
  j["t"] = r.time;
  j["ev"] = event_name(r.event);
  std::visit(Writer{j}, r.event);
  return j.dump();
}

TraceRecord parse_line(std::string_view line, std::size_t line_no) {
  try {
    const Json j = Json::parse(line);
    TraceRecord r;
    r.index = j.at("i");
    r.time = j.at("t");
    r.event = read_event(j.at("ev").get<std::string>(), j);
    return r;
  } catch (const TraceFormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw TraceFormatError(line_no, e.what());
  }
}

void write_trace(std::ostream& out, const Trace& trace) {
  for (const auto& r : trace) out << to_line(r) << '\n';
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    TraceRecord r = parse_line(line, line_no);
    if (!trace.empty()) {
      if (r.index <= trace.back().index) throw TraceFormatError(line_no, "index not strictly increasing");
      if (r.time < trace.back().time) throw TraceFormatError(line_no, "time decreases");
    }
    trace.push_back(std::move(r));
  }
  return trace;
}

}  // namespace wnslab
