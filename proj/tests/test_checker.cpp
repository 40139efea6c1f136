#include <doctest.h>

#include <map>
#include <sstream>

#include "support/random_scenario.hpp"
#include "support/scenarios.hpp"
#include "wnslab/checker.hpp"
#include "wnslab/simulation.hpp"

using namespace wnslab;

namespace {

struct Run {
  Scenario scenario;
  Trace trace;
};

Run run(const std::string& name) {
  Run r{fixture::bundled(name), {}};
  Simulation sim(r.scenario);
  sim.run();
  r.trace = sim.trace();
  return r;
}

std::vector<std::string> failed_of(const std::string& name) {
  const Run r = run(name);
  return check(r.trace, r.scenario).failed();
}

}  // namespace

TEST_CASE("clean bundled scenarios satisfy every property") {
  for (const char* name : {"fault_free_5node", "minimal", "switch_c0", "double_failure"}) {
    CAPTURE(name);
    const Run r = run(name);
    const PropertyReport rep = check(r.trace, r.scenario);
    CHECK(rep.all_pass());
    for (const auto& p : rep.properties) {
      CAPTURE(p.name);
      CHECK(p.counterexample.empty());
    }
  }
}

TEST_CASE("each adversarial scenario breaks exactly its target") {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"adv_wns1_equivocate", "WnS1"}, {"adv_wns2_delay", "WnS2"},  {"adv_wns3_loopback", "WnS3"},
      {"adv_wns4_unsignalled", "WnS4"}, {"adv_wns5_budget", "WnS5"}, {"adv_wns6_glitches", "WnS6"},
      {"adv_wns7_stall", "WnS7"}};
  for (const auto& [name, target] : cases) {
    CAPTURE(name);
    CHECK(failed_of(name) == std::vector<std::string>{target});
  }
}

TEST_CASE("unsignalled corruption is reported at the corrupted delivery") {
  const Run r = run("adv_wns4_unsignalled");
  // independent scan: deliveries whose bytes differ from what was sent
  std::map<std::uint64_t, Bytes> sent;
  std::vector<std::uint64_t> expected;
  for (const auto& rec : r.trace) {
    if (const auto* s = std::get_if<ev::TxStart>(&rec.event)) sent[s->tx] = s->bytes;
    if (const auto* d = std::get_if<ev::Deliver>(&rec.event)) {
      if (d->bytes != sent.at(d->tx)) expected.push_back(rec.index);
    }
  }
  REQUIRE_FALSE(expected.empty());
  const PropertyReport rep = check(r.trace, r.scenario);
  CHECK(rep[4].counterexample == expected);
  for (auto idx : expected) CHECK(std::get<ev::Deliver>(r.trace.at(idx).event).receiver == 4);
}

TEST_CASE("two glitches in one window name both starts") {
  const Run r = run("adv_wns6_glitches");
  const auto starts = fixture::records<ev::InaccessStart>(r.trace);
  REQUIRE(starts.size() == 2);
  const PropertyReport rep = check(r.trace, r.scenario);
  CHECK(rep[6].counterexample == std::vector<std::uint64_t>{starts[0].index, starts[1].index});
}

TEST_CASE("without the channel layer a dead channel breaks WnS5 and WnS7") {
  CHECK(failed_of("ablation_no_channel_layer") == std::vector<std::string>{"WnS5", "WnS7"});
}

TEST_CASE("checking is deterministic and survives serialization") {
  const Run r = run("double_failure");
  std::ostringstream out;
  write_trace(out, r.trace);
  std::istringstream in(out.str());
  const Trace back = read_trace(in);
  CHECK(to_json(check(r.trace, r.scenario)) == to_json(check(back, r.scenario)));
  CHECK(to_json(check(r.trace, r.scenario)) == to_json(check(r.trace, r.scenario)));
}

TEST_CASE("summary counts") {
  const Run r = run("fault_free_5node");
  const TraceSummary s = summarize(r.trace);
  CHECK(s.messages == 1);
  CHECK(s.messages_ok == 1);
  CHECK(s.deliveries == fixture::events<ev::Deliver>(r.trace).size());
  CHECK(s.omissions == 0);
  CHECK(s.periods == 0);
  CHECK(s.frames == fixture::events<ev::TxStart>(r.trace).size());
}

TEST_CASE("an empty trace trivially passes") {
  const Scenario s = fixture::bundled("minimal");
  CHECK(check(Trace{}, s).all_pass());
}

TEST_CASE("a truncated trace with an open period is rejected") {
  const Scenario s = fixture::bundled("minimal");
  Trace t;
  t.push_back({0, 10, ev::InaccessStart{0, ev::InaCause::Injected}});
  CHECK_THROWS(check(t, s));
}

TEST_CASE("random in-budget scenarios exercise every fault kind and keep every property") {
  int omissions = 0, glitches = 0, failures = 0, doubles = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    CAPTURE(seed);
    const Scenario s = fixture::random_scenario(seed);
    REQUIRE(validate(s).empty());
    omissions += s.faults.omissions.empty() ? 0 : 1;
    glitches += s.faults.inaccessibility.empty() ? 0 : 1;
    failures += s.faults.channel_failures.empty() ? 0 : 1;
    doubles += s.faults.channel_failures.size() == 2 ? 1 : 0;
    Simulation sim(s);
    sim.run();
    CHECK(check(sim.trace(), s).all_pass());
  }
  CHECK(omissions > 50);
  CHECK(glitches > 50);
  CHECK(failures > 50);
  CHECK(doubles > 20);
}
