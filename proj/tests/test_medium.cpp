#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "support/segments.hpp"
#include "wnslab/medium.hpp"

using namespace wnslab;

namespace {

Frame data_frame(NodeId src, std::uint8_t seq, std::size_t payload = 10) {
  Frame f;
  f.kind = FrameKind::Data;
  f.src = src;
  f.seq = seq;
  f.round = 1;
  f.wns_id = 7;
  f.payload.assign(payload, static_cast<std::uint8_t>(seq));
  return f;
}

template <class E>
std::vector<E> events(const Trace& t) {
  std::vector<E> out;
  for (const auto& r : t) {
    if (const auto* e = std::get_if<E>(&r.event)) out.push_back(*e);
  }
  return out;
}

template <class E>
std::vector<TraceRecord> records(const Trace& t) {
  std::vector<TraceRecord> out;
  for (const auto& r : t) {
    if (std::holds_alternative<E>(r.event)) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("airtime") {
  Frame f;
  CHECK(airtime(f) == 30);
  f.payload.assign(114, 0);
  CHECK(airtime(f) == 258);
  for (std::size_t n = 0; n <= kMaxPayload; ++n) {
    f.payload.assign(n, 0);
    REQUIRE(airtime(f) == 2 * (15 + n));
  }
}

TEST_CASE("fault-free broadcast delivers identical copies at TxEnd") {
  Medium m(fixture::ring(4, {11}, fixture::default_params(0)), {}, 1);
  const Frame f = data_frame(1, 0);
  m.transmit(1, f, 11);
  m.run_until(1000);
  const auto delivers = records<ev::Deliver>(m.trace());
  REQUIRE(delivers.size() == 3);
  const auto end = records<ev::TxEnd>(m.trace()).at(0).time;
  CHECK(end == airtime(f));
  for (const auto& r : delivers) {
    CHECK(r.time == end);
    CHECK(std::get<ev::Deliver>(r.event).bytes == encode(f));
  }
}

TEST_CASE("inconsistent omission spares the other receivers") {
  FaultScript s;
  s.omissions.push_back(OmissionDirective{FrameKind::Data, 0, 1, 1, std::set<NodeId>{3}, FaultMode::Destroy, 0});
  Medium m(fixture::ring(4, {11}, fixture::default_params(0)), s, 1);
  m.transmit(1, data_frame(1, 0), 11);
  m.run_until(1000);
  std::set<NodeId> got;
  for (const auto& d : events<ev::Deliver>(m.trace())) got.insert(d.receiver);
  CHECK(got == std::set<NodeId>{2, 4});
  const auto om = events<ev::OmissionInjected>(m.trace());
  REQUIRE(om.size() == 1);
  CHECK(om[0].victims == std::vector<NodeId>{3});
}

TEST_CASE("simultaneous requests are serialised and received in one order") {
  Medium m(fixture::ring(4, {11}, fixture::default_params(0)), {}, 1);
  m.schedule(50, [&] {
    m.transmit(3, data_frame(3, 0, 20), 11);
    m.transmit(2, data_frame(2, 0, 5), 11);
  });
  m.run_until(2000);
  const auto starts = records<ev::TxStart>(m.trace());
  const auto ends = records<ev::TxEnd>(m.trace());
  REQUIRE(starts.size() == 2);
  // Replay oracle: equal request times resolve by node id.
  CHECK(std::get<ev::TxStart>(starts[0].event).src == 2);
  CHECK(starts[0].time == 50);
  CHECK(starts[1].time == ends[0].time);
  std::map<NodeId, std::vector<NodeId>> order;
  for (const auto& d : events<ev::Deliver>(m.trace())) {
    order[d.receiver].push_back(static_cast<NodeId>(decode(d.bytes, {}).index() == 0
                                                       ? std::get<Frame>(decode(d.bytes, {})).src
                                                       : 0));
  }
  CHECK(order[1] == std::vector<NodeId>{2, 3});
  CHECK(order[4] == std::vector<NodeId>{2, 3});
}

TEST_CASE("channel failure and inaccessibility destroy every copy") {
  FaultScript s;
  s.channel_failures.push_back({11, {100, 200}});
  s.inaccessibility.push_back({400, 450});
  Medium m(fixture::ring(3, {11}, fixture::default_params(0)), s, 1);
  m.schedule(90, [&] { m.transmit(1, data_frame(1, 0), 11, true); });   // overlaps failure
  m.schedule(300, [&] { m.transmit(1, data_frame(1, 1), 11, true); });  // clean
  m.schedule(420, [&] { m.transmit(2, data_frame(2, 0), 11); });        // inaccessible
  m.run_until(1000);
  const auto om = events<ev::OmissionInjected>(m.trace());
  REQUIRE(om.size() == 2);
  CHECK(om[0].cause == ev::OmissionCause::ChannelFailure);
  CHECK(om[0].victims == std::vector<NodeId>{1, 2, 3});
  CHECK(om[1].cause == ev::OmissionCause::Inaccessibility);
  CHECK(events<ev::Deliver>(m.trace()).size() == 3);  // loopback + two receivers of the clean frame
  CHECK(events<ev::InaccessStart>(m.trace()).size() == 1);
  CHECK(events<ev::InaccessEnd>(m.trace()).size() == 1);
}

TEST_CASE("corrupt directive delivers bytes that fail the fcs") {
  FaultScript s;
  s.omissions.push_back(OmissionDirective{std::nullopt, std::nullopt, std::nullopt, 1, std::set<NodeId>{2},
                                          FaultMode::Corrupt, 0});
  Medium m(fixture::ring(3, {11}, fixture::default_params(0)), s, 1);
  const Frame f = data_frame(1, 0);
  m.transmit(1, f, 11);
  m.run_until(1000);
  for (const auto& d : events<ev::Deliver>(m.trace())) {
    const auto r = decode(d.bytes, {11, 0, d.receiver});
    CHECK(std::holds_alternative<OmissionSignal>(r) == (d.receiver == 2));
  }
  const auto om = events<ev::OmissionInjected>(m.trace());
  REQUIRE(om.size() == 1);
  CHECK(om[0].corrupt);
}

TEST_CASE("loopback follows the victim rule") {
  FaultScript s;
  s.omissions.push_back(OmissionDirective{FrameKind::Data, 1, std::nullopt, 1, std::nullopt, FaultMode::Destroy, 0});
  Medium m(fixture::ring(3, {11}, fixture::default_params(0)), s, 1);
  m.transmit(1, data_frame(1, 0), 11, true);
  m.schedule(200, [&] { m.transmit(1, data_frame(1, 1), 11, true); });
  m.run_until(1000);
  std::vector<TxId> self;
  for (const auto& d : events<ev::Deliver>(m.trace())) {
    if (d.receiver == 1) self.push_back(d.tx);
  }
  CHECK(self == std::vector<TxId>{0});
}

TEST_CASE("transmit errors") {
  Medium m(fixture::ring(3, {11}, fixture::default_params(0)), {}, 1);
  CHECK_THROWS_AS(m.transmit(1, data_frame(1, 0), 12), SimError);
  CHECK_THROWS_AS(m.transmit(9, data_frame(9, 0), 11), SimError);
}

TEST_CASE("run_until with nothing scheduled appends nothing") {
  Medium m(fixture::ring(3, {11}, fixture::default_params(0)), {}, 1);
  CHECK(m.run_until(5000) == 0);
  CHECK(m.now() == 5000);
}

namespace {

// Random broadcast schedule with random destroy directives.
struct Workload {
  std::vector<std::pair<SimTime, NodeId>> sends;
  FaultScript faults;
};

Workload random_workload(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  Workload w;
  for (int k = 0; k < n; ++k) {
    w.sends.emplace_back(rng() % 20000, static_cast<NodeId>(1 + rng() % 5));
  }
  for (int k = 0; k < n / 5; ++k) {
    OmissionDirective d;
    d.seq = static_cast<std::uint8_t>(rng() % n);
    d.sender = static_cast<NodeId>(1 + rng() % 5);
    d.victims = std::set<NodeId>{static_cast<NodeId>(1 + rng() % 5)};
    w.faults.omissions.push_back(d);
  }
  return w;
}

Trace run_workload(const Workload& w, std::uint64_t seed) {
  Medium m(fixture::ring(5, {11}, fixture::default_params(0)), w.faults, seed);
  std::uint8_t seq = 0;
  for (const auto& [t, src] : w.sends) {
    const std::uint8_t s = seq++;
    m.schedule(t, [&m, src = src, s] { m.transmit(src, data_frame(src, s), 11); });
  }
  m.run_until(100000);
  return m.trace();
}

}  // namespace

TEST_CASE("record count matches the script accounting") {
  const Workload w = random_workload(123, 100);
  const Trace t = run_workload(w, 1);
  // Accounting oracle: each send yields TxStart, TxEnd and four deliveries,
  // minus one delivery per victim, plus one record per firing directive.
  std::size_t omission_records = 0;
  std::size_t lost = 0;
  for (const auto& o : events<ev::OmissionInjected>(t)) {
    ++omission_records;
    lost += o.victims.size();
  }
  CHECK(t.size() == w.sends.size() * 6 - lost + omission_records);
  CHECK(events<ev::TxStart>(t).size() == 100);
  // At most one frame on the air per channel.
  SimTime busy_until = 0;
  for (const auto& r : t) {
    if (std::holds_alternative<ev::TxStart>(r.event)) {
      REQUIRE(r.time >= busy_until);
      busy_until = r.time + 1;
    }
    if (std::holds_alternative<ev::TxEnd>(r.event)) busy_until = r.time;
  }
}

TEST_CASE("identical inputs give byte-identical traces") {
  const Workload w = random_workload(77, 60);
  std::ostringstream a;
  std::ostringstream b;
  write_trace(a, run_workload(w, 5));
  write_trace(b, run_workload(w, 5));
  CHECK(a.str() == b.str());
  CHECK_FALSE(a.str().empty());
}

TEST_CASE("trace lines round-trip through the parser") {
  FaultScript s;
  s.inaccessibility.push_back({10, 20});
  s.omissions.push_back(OmissionDirective{std::nullopt, std::nullopt, std::nullopt, 2, std::set<NodeId>{1},
                                          FaultMode::Corrupt, 0});
  Medium m(fixture::ring(3, {11}, fixture::default_params(0)), s, 3);
  m.transmit(2, data_frame(2, 0), 11, true);
  m.run_until(500);
  std::ostringstream out;
  write_trace(out, m.trace());
  std::istringstream in(out.str());
  const Trace back = read_trace(in);
  REQUIRE(back.size() == m.trace().size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(to_line(back[i]) == to_line(m.trace()[i]));
}

TEST_CASE("malformed trace lines are rejected with their line number") {
  std::istringstream in("{\"i\":0,\"t\":0,\"ev\":\"TxEnd\",\"tx\":0,\"ch\":1}\n{\"i\":0,\"t\":1,\"ev\":\"Bogus\"}\n");
  try {
    read_trace(in);
    FAIL("expected an error");
  } catch (const TraceFormatError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("apply_move") {
  WnS w = fixture::ring(3, {11, 12}, fixture::default_params(1), 50.0);

  SUBCASE("move inside the domain changes nothing") {
    Medium m(w, {}, 1);
    m.schedule(10, [&] { m.apply_move(2, {1.0, 1.0}); });
    m.run_until(100);
    CHECK(events<ev::MembershipChange>(m.trace()).empty());
  }
  SUBCASE("move outside every range commits a leave") {
    Medium m(w, {}, 1);
    m.schedule(10, [&] { m.apply_move(3, {500.0, 0.0}); });
    m.run_until(100);
    const auto ch = events<ev::MembershipChange>(m.trace());
    REQUIRE(ch.size() == 1);
    CHECK(ch[0].node == 3);
    CHECK_FALSE(ch[0].joined);
    CHECK_FALSE(m.is_current_member(3));
    CHECK_THROWS_AS(m.transmit(3, data_frame(3, 0), 11), SimError);
    m.transmit(1, data_frame(1, 0), 11);
    m.run_until(400);
    for (const auto& d : events<ev::Deliver>(m.trace())) CHECK(d.receiver != 3);
  }
  SUBCASE("unknown node") {
    Medium m(w, {}, 1);
    CHECK_THROWS_AS(m.apply_move(42, {0, 0}), SimError);
  }
  SUBCASE("waypoint sweep flips where the geometry predicts") {
    FaultScript s;
    // Node 3 walks along +x one metre per 10 symbols.
    for (int k = 0; k <= 120; ++k) s.moves.push_back({3, static_cast<SimTime>(10 * k), {static_cast<double>(k), 0.0}});
    Medium m(w, s, 1);
    m.run_until(2000);
    const auto ch = records<ev::MembershipChange>(m.trace());
    REQUIRE(!ch.empty());
    // Geometry oracle: node 3 drags its own circle; the domain is bounded by
    // nodes 1 and 2 (radius 50 around their fixed positions).
    const Point p1 = w.members.at(1).position;
    const Point p2 = w.members.at(2).position;
    SimTime expected = 0;
    for (int k = 0; k <= 120; ++k) {
      const double x = k;
      const bool in1 = std::hypot(x - p1.x, 0.0 - p1.y) <= 50.0;
      const bool in2 = std::hypot(x - p2.x, 0.0 - p2.y) <= 50.0;
      if (!(in1 && in2)) {
        expected = static_cast<SimTime>(10 * k);
        break;
      }
    }
    CHECK(ch.front().time == expected);
  }
}
