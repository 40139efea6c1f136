#include "wnslab/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wnslab/mediator.hpp"

namespace wnslab {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError(where + ": " + what);
}

void allow(const json& j, const std::string& where, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) fail(where, "unknown key '" + k + "'");
  }
}

std::uint64_t uint_at(const json& j, const std::string& where) {
  if (!j.is_number_unsigned()) fail(where, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

template <class T>
T bounded(const json& j, const std::string& where) {
  const std::uint64_t v = uint_at(j, where);
  if (v > std::numeric_limits<T>::max()) fail(where, "out of range");
  return static_cast<T>(v);
}

double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

bool bool_at(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected true or false");
  return j.get<bool>();
}

const json& array_at(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  return j;
}

Point point_at(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(where, "expected [x, y]");
  return Point{number_at(j[0], where + "[0]"), number_at(j[1], where + "[1]")};
}

template <class T, class F>
void opt(const json& obj, const char* key, T& out, F&& read, const std::string& where) {
  if (obj.contains(key)) out = read(obj.at(key), where + "." + key);
}

CommRange range_at(const json& j, Point position, const std::string& where) {
  allow(j, where, {"center", "semi_major", "semi_minor", "rotation"});
  CommRange r;
  r.center = position;
  opt(j, "center", r.center, point_at, where);
  if (!j.contains("semi_major")) fail(where, "missing 'semi_major'");
  r.semi_major = number_at(j.at("semi_major"), where + ".semi_major");
  r.semi_minor = r.semi_major;
  opt(j, "semi_minor", r.semi_minor, number_at, where);
  opt(j, "rotation", r.rotation, number_at, where);
  return r;
}

WnSParams params_at(const json& j, std::size_t channels, const std::string& where) {
  allow(j, where, {"k", "i", "f", "f_o", "tau_rd", "tau_td", "tau_ina"});
  WnSParams p{2, 1, static_cast<std::uint32_t>(channels > 0 ? channels - 1 : 0), 1, 4000, 400, 3000};
  auto u32 = bounded<std::uint32_t>;
  opt(j, "k", p.k, u32, where);
  opt(j, "i", p.i, u32, where);
  opt(j, "f", p.f, u32, where);
  opt(j, "f_o", p.f_o, u32, where);
  opt(j, "tau_rd", p.tau_rd, uint_at, where);
  opt(j, "tau_td", p.tau_td, uint_at, where);
  opt(j, "tau_ina", p.tau_ina, uint_at, where);
  return p;
}

WnS wns_at(const json& j) {
  const std::string where = "wns";
  allow(j, where, {"id", "coordinator", "channels", "protocols", "params", "nodes"});
  for (const char* key : {"coordinator", "channels", "nodes"}) {
    if (!j.contains(key)) fail(where, std::string("missing '") + key + "'");
  }
  WnS w;
  opt(j, "id", w.id, bounded<std::uint16_t>, where);
  w.coordinator_id = bounded<NodeId>(j.at("coordinator"), where + ".coordinator");
  for (const auto& c : array_at(j.at("channels"), where + ".channels")) {
    w.channels.push_back(bounded<ChannelId>(c, where + ".channels[]"));
  }
  w.protocols = {"channel_layer", "mediator"};
  if (j.contains("protocols")) {
    w.protocols.clear();
    for (const auto& p : array_at(j.at("protocols"), where + ".protocols")) {
      if (!p.is_string()) fail(where + ".protocols[]", "expected a string");
      w.protocols.insert(p.get<std::string>());
    }
  }
  w.params = params_at(j.value("params", json::object()), w.channels.size(), where + ".params");
  std::size_t n = 0;
  for (const auto& node : array_at(j.at("nodes"), where + ".nodes")) {
    const std::string at = where + ".nodes[" + std::to_string(n++) + "]";
    allow(node, at, {"id", "position", "range", "ranges"});
    if (!node.contains("id") || !node.contains("position")) fail(at, "needs 'id' and 'position'");
    Node x;
    x.id = bounded<NodeId>(node.at("id"), at + ".id");
    x.position = point_at(node.at("position"), at + ".position");
    x.coordinator = x.id == w.coordinator_id;
    if (node.contains("range") == node.contains("ranges")) fail(at, "needs exactly one of 'range' or 'ranges'");
    if (node.contains("range")) {
      const CommRange r = range_at(node.at("range"), x.position, at + ".range");
      for (ChannelId c : w.channels) x.ranges[c] = r;
    } else {
      const json& rs = node.at("ranges");
      if (!rs.is_object()) fail(at + ".ranges", "expected an object keyed by channel id");
      for (const auto& [key, value] : rs.items()) {
        ChannelId c = 0;
        try {
          std::size_t used = 0;
          const unsigned long parsed = std::stoul(key, &used);
          if (used != key.size() || parsed > 0xFFFFUL) throw std::out_of_range(key);
          c = static_cast<ChannelId>(parsed);
        } catch (const std::exception&) {
          fail(at + ".ranges", "key '" + key + "' is not a channel id");
        }
        x.ranges[c] = range_at(value, x.position, at + ".ranges." + key);
      }
    }
    if (!w.members.emplace(x.id, x).second) fail(at, "duplicate node id " + std::to_string(x.id));
  }
  return w;
}

SwitchConfig switch_at(const json& j, const WnSParams& p) {
  const std::string where = "switch";
  allow(j, where, {"t_silence", "t_beacon_wait", "beacon_cadence", "hop_time", "repetitions"});
  SwitchConfig cfg = default_switch_config(p);
  opt(j, "t_silence", cfg.t_silence, uint_at, where);
  opt(j, "t_beacon_wait", cfg.t_beacon_wait, uint_at, where);
  opt(j, "beacon_cadence", cfg.beacon_cadence, uint_at, where);
  opt(j, "hop_time", cfg.hop_time, uint_at, where);
  opt(j, "repetitions", cfg.repetitions, bounded<std::uint32_t>, where);
  return cfg;
}

Interval interval_at(const json& j, const std::string& where, std::initializer_list<std::string_view> keys) {
  allow(j, where, keys);
  if (!j.contains("start") || !j.contains("end")) fail(where, "needs 'start' and 'end'");
  return Interval{uint_at(j.at("start"), where + ".start"), uint_at(j.at("end"), where + ".end")};
}

OmissionDirective directive_at(const json& j, const std::string& where) {
  allow(j, where, {"kind", "seq", "round", "sender", "victims", "mode", "delay"});
  OmissionDirective d;
  if (j.contains("kind")) {
    const json& k = j.at("kind");
    std::optional<FrameKind> kind;
    if (k.is_string()) kind = frame_kind_from_string(k.get<std::string>());
    if (!kind) fail(where + ".kind", "expected one of DATA, CONFIRM, SWITCH, BEACON");
    d.kind = kind;
  }
  if (j.contains("seq")) d.seq = bounded<std::uint8_t>(j.at("seq"), where + ".seq");
  if (j.contains("round")) d.round = bounded<std::uint8_t>(j.at("round"), where + ".round");
  if (j.contains("sender")) d.sender = bounded<NodeId>(j.at("sender"), where + ".sender");
  if (j.contains("victims")) {
    const json& v = j.at("victims");
    if (v.is_string() && v.get<std::string>() == "all") {
      d.victims.reset();
    } else if (v.is_array()) {
      d.victims.emplace();
      for (const auto& id : v) d.victims->insert(bounded<NodeId>(id, where + ".victims[]"));
    } else {
      fail(where + ".victims", "expected \"all\" or a list of node ids");
    }
  }
  if (j.contains("mode")) {
    const json& m = j.at("mode");
    std::optional<FaultMode> mode;
    if (m.is_string()) mode = fault_mode_from_string(m.get<std::string>());
    if (!mode) fail(where + ".mode", "expected one of destroy, corrupt, equivocate, delay, stall");
    d.mode = *mode;
  }
  opt(j, "delay", d.delay, uint_at, where);
  return d;
}

FaultScript faults_at(const json& j) {
  const std::string where = "faults";
  allow(j, where, {"omissions", "channel_failures", "inaccessibility", "moves"});
  FaultScript s;
  std::size_t n = 0;
  if (j.contains("omissions")) {
    for (const auto& d : array_at(j.at("omissions"), where + ".omissions")) {
      s.omissions.push_back(directive_at(d, where + ".omissions[" + std::to_string(n++) + "]"));
    }
  }
  n = 0;
  if (j.contains("channel_failures")) {
    for (const auto& w : array_at(j.at("channel_failures"), where + ".channel_failures")) {
      const std::string at = where + ".channel_failures[" + std::to_string(n++) + "]";
      const Interval when = interval_at(w, at, {"channel", "start", "end"});
      if (!w.contains("channel")) fail(at, "missing 'channel'");
      s.channel_failures.push_back({bounded<ChannelId>(w.at("channel"), at + ".channel"), when});
    }
  }
  n = 0;
  if (j.contains("inaccessibility")) {
    for (const auto& w : array_at(j.at("inaccessibility"), where + ".inaccessibility")) {
      s.inaccessibility.push_back(
          interval_at(w, where + ".inaccessibility[" + std::to_string(n++) + "]", {"start", "end"}));
    }
  }
  n = 0;
  if (j.contains("moves")) {
    for (const auto& m : array_at(j.at("moves"), where + ".moves")) {
      const std::string at = where + ".moves[" + std::to_string(n++) + "]";
      allow(m, at, {"node", "time", "position"});
      if (!m.contains("node") || !m.contains("time") || !m.contains("position")) {
        fail(at, "needs 'node', 'time' and 'position'");
      }
      s.moves.push_back(Move{bounded<NodeId>(m.at("node"), at + ".node"), uint_at(m.at("time"), at + ".time"),
                             point_at(m.at("position"), at + ".position")});
    }
  }
  return s;
}

std::vector<WorkloadItem> workload_at(const json& j) {
  std::vector<WorkloadItem> out;
  std::size_t n = 0;
  for (const auto& w : array_at(j, "workload")) {
    const std::string at = "workload[" + std::to_string(n++) + "]";
    allow(w, at, {"sender", "payload_size", "send_time", "deadline"});
    if (!w.contains("sender") || !w.contains("send_time")) fail(at, "needs 'sender' and 'send_time'");
    WorkloadItem item;
    item.sender = bounded<NodeId>(w.at("sender"), at + ".sender");
    item.send_time = uint_at(w.at("send_time"), at + ".send_time");
    opt(w, "payload_size", item.payload_size, bounded<std::size_t>, at);
    if (w.contains("deadline")) item.deadline = uint_at(w.at("deadline"), at + ".deadline");
    out.push_back(item);
  }
  return out;
}

Mutations mutations_at(const json& j) {
  allow(j, "mutations", {"disable_signalling", "disable_channel_layer", "drop_data_loopback"});
  Mutations m;
  opt(j, "disable_signalling", m.disable_signalling, bool_at, "mutations");
  opt(j, "disable_channel_layer", m.disable_channel_layer, bool_at, "mutations");
  opt(j, "drop_data_loopback", m.drop_data_loopback, bool_at, "mutations");
  return m;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

ojson emit_range(const CommRange& r) {
  ojson j;
  j["center"] = {r.center.x, r.center.y};
  j["semi_major"] = r.semi_major;
  j["semi_minor"] = r.semi_minor;
  j["rotation"] = r.rotation;
  return j;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("syntax error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  allow(root, "scenario", {"wns", "switch", "faults", "workload", "seed", "horizon", "mutations"});
  if (!root.contains("wns")) fail("scenario", "missing 'wns'");
  if (!root.contains("horizon")) fail("scenario", "missing 'horizon'");
  Scenario s;
  s.wns = wns_at(root.at("wns"));
  s.switching = switch_at(root.value("switch", json::object()), s.wns.params);
  s.faults = faults_at(root.value("faults", json::object()));
  if (root.contains("workload")) s.workload = workload_at(root.at("workload"));
  opt(root, "seed", s.seed, uint_at, std::string("scenario"));
  s.horizon = uint_at(root.at("horizon"), "scenario.horizon");
  s.mutations = mutations_at(root.value("mutations", json::object()));
  if (auto bad = validate(s); !bad.empty()) {
    std::string all;
    for (const auto& b : bad) all += (all.empty() ? "" : "; ") + b;
    throw ScenarioError("invalid scenario: " + all);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ScenarioError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string emit_scenario(const Scenario& s) {
  ojson root;
  ojson w;
  w["id"] = s.wns.id;
  w["coordinator"] = s.wns.coordinator_id;
  w["channels"] = s.wns.channels;
  w["protocols"] = s.wns.protocols;
  const auto& p = s.wns.params;
  w["params"] = {{"k", p.k}, {"i", p.i}, {"f", p.f}, {"f_o", p.f_o},
                 {"tau_rd", p.tau_rd}, {"tau_td", p.tau_td}, {"tau_ina", p.tau_ina}};
  ojson nodes = ojson::array();
  for (const auto& [id, n] : s.wns.members) {
    ojson node;
    node["id"] = id;
    node["position"] = {n.position.x, n.position.y};
    ojson ranges = ojson::object();
    for (const auto& [c, r] : n.ranges) ranges[std::to_string(c)] = emit_range(r);
    node["ranges"] = ranges;
    nodes.push_back(node);
  }
  w["nodes"] = nodes;
  root["wns"] = w;

  const auto& c = s.switching;
  root["switch"] = {{"t_silence", c.t_silence}, {"t_beacon_wait", c.t_beacon_wait},
                    {"beacon_cadence", c.beacon_cadence}, {"hop_time", c.hop_time},
                    {"repetitions", c.repetitions}};

  ojson faults;
  ojson omissions = ojson::array();
  for (const auto& d : s.faults.omissions) {
    ojson o;
    if (d.kind) o["kind"] = to_string(*d.kind);
    if (d.seq) o["seq"] = *d.seq;
    if (d.round) o["round"] = *d.round;
    if (d.sender) o["sender"] = *d.sender;
    if (d.victims) {
      o["victims"] = *d.victims;
    } else {
      o["victims"] = "all";
    }
    o["mode"] = to_string(d.mode);
    o["delay"] = d.delay;
    omissions.push_back(o);
  }
  faults["omissions"] = omissions;
  ojson failures = ojson::array();
  for (const auto& f : s.faults.channel_failures) {
    failures.push_back({{"channel", f.channel}, {"start", f.when.start}, {"end", f.when.end}});
  }
  faults["channel_failures"] = failures;
  ojson ina = ojson::array();
  for (const auto& i : s.faults.inaccessibility) ina.push_back({{"start", i.start}, {"end", i.end}});
  faults["inaccessibility"] = ina;
  ojson moves = ojson::array();
  for (const auto& m : s.faults.moves) {
    moves.push_back({{"node", m.node}, {"time", m.time}, {"position", {m.position.x, m.position.y}}});
  }
  faults["moves"] = moves;
  root["faults"] = faults;

  ojson workload = ojson::array();
  for (const auto& item : s.workload) {
    ojson o{{"sender", item.sender}, {"payload_size", item.payload_size}, {"send_time", item.send_time}};
    if (item.deadline) o["deadline"] = *item.deadline;
    workload.push_back(o);
  }
  root["workload"] = workload;
  root["seed"] = s.seed;
  root["horizon"] = s.horizon;
  root["mutations"] = {{"disable_signalling", s.mutations.disable_signalling},
                       {"disable_channel_layer", s.mutations.disable_channel_layer},
                       {"drop_data_loopback", s.mutations.drop_data_loopback}};
  return root.dump(2) + "\n";
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> out = validate(s.wns);
  if (!out.empty()) return out;  // the rest assumes a well-formed segment
  const auto& p = s.wns.params;
  for (const auto& [id, n] : s.wns.members) {
    if (!is_member(n, s.wns)) out.push_back("node " + std::to_string(id) + " starts outside the broadcast domain");
  }
  for (auto& b : validate(s.faults)) out.push_back(std::move(b));
  auto known = [&](NodeId id) { return s.wns.members.contains(id); };
  auto channel = [&](ChannelId c) { return std::find(s.wns.channels.begin(), s.wns.channels.end(), c) != s.wns.channels.end(); };
  for (const auto& f : s.faults.channel_failures) {
    if (!channel(f.channel)) out.push_back("channel failure on unknown channel " + std::to_string(f.channel));
  }
  for (const auto& w : s.faults.inaccessibility) {
    if (w.end > s.horizon) out.push_back("inaccessibility window ends after the horizon");
  }
  for (const auto& m : s.faults.moves) {
    if (!known(m.node)) out.push_back("move of unknown node " + std::to_string(m.node));
  }
  if (s.horizon == 0) out.emplace_back("horizon > 0");
  std::size_t largest = 0;
  for (const auto& w : s.workload) {
    if (!known(w.sender)) out.push_back("workload sender " + std::to_string(w.sender) + " unknown");
    if (w.payload_size > kMaxPayload) out.push_back("workload payload exceeds " + std::to_string(kMaxPayload) + " bytes");
    if (w.send_time > s.horizon) out.emplace_back("workload send time after the horizon");
    if (w.deadline && *w.deadline < w.send_time) out.emplace_back("workload deadline precedes its send time");
    largest = std::max(largest, w.payload_size);
  }
  for (auto& b : round_fits(p, largest, s.wns.members.size() - 1)) out.push_back(std::move(b));

  const auto& c = s.switching;
  if (c.beacon_cadence != p.tau_td) out.emplace_back("beacon_cadence = tau_td");
  if (c.t_beacon_wait == 0) out.emplace_back("t_beacon_wait > 0");
  if (c.repetitions == 0) out.emplace_back("repetitions >= 1");
  Frame announce;
  announce.kind = FrameKind::Switch;
  announce.payload.resize(2);
  if (c.repetitions * airtime(announce) >= c.t_silence) out.emplace_back("SWITCH announcements must end before t_silence");
  if (p.f >= 1 && !s.mutations.disable_channel_layer && p.tau_ina < switch_worst_case(p, c)) {
    out.push_back("tau_ina >= switch worst case (" + std::to_string(switch_worst_case(p, c)) + ")");
  }
  return out;
}

}  // namespace wnslab
