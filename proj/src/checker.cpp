#include "wnslab/checker.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include <json.hpp>

#include "wnslab/inaccessibility.hpp"
#include "wnslab/mediator.hpp"

namespace wnslab {

namespace {

struct TxInfo {
  const ev::TxStart* start = nullptr;
  std::uint64_t start_index = 0;
  std::optional<SimTime> end_time;
  std::uint64_t end_index = 0;
  std::vector<const ev::OmissionInjected*> omissions;
};

struct DeliveryView {
  const ev::Deliver* d = nullptr;
  std::uint64_t index = 0;
  SimTime time = 0;
  bool corrupted = false;
};

void fail(PropertyResult& r, std::uint64_t index, const std::string& detail) {
  if (r.pass) r.detail = detail;
  r.pass = false;
  if (std::find(r.counterexample.begin(), r.counterexample.end(), index) == r.counterexample.end()) {
    r.counterexample.push_back(index);
  }
}

bool decodes_cleanly(const ev::Deliver& d) {
  if (d.bytes.size() < kMinFrameBytes || d.bytes.size() > kMaxFrameBytes - 4) return false;
  return std::holds_alternative<Frame>(decode(d.bytes, RxContext{d.channel, 0, d.receiver}));
}

}  // namespace

bool PropertyReport::all_pass() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& r) { return r.pass; });
}

std::vector<std::string> PropertyReport::failed() const {
  std::vector<std::string> out;
  for (const auto& p : properties) {
    if (!p.pass) out.push_back(p.name);
  }
  return out;
}

TraceSummary summarize(const Trace& trace) {
  TraceSummary s;
  std::set<std::uint32_t> periods;
  for (const auto& r : trace) {
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, ev::TxStart>) ++s.frames;
          if constexpr (std::is_same_v<T, ev::Deliver>) ++s.deliveries;
          if constexpr (std::is_same_v<T, ev::OmissionInjected>) ++s.omissions;
          if constexpr (std::is_same_v<T, ev::SignalEmitted>) ++s.signals;
          if constexpr (std::is_same_v<T, ev::ChannelSwitch>) ++s.switches;
          if constexpr (std::is_same_v<T, ev::InaccessStart>) periods.insert(e.period);
          if constexpr (std::is_same_v<T, ev::MsgStart>) ++s.messages;
          if constexpr (std::is_same_v<T, ev::MsgDone>) s.messages_ok += e.success ? 1 : 0;
        },
        r.event);
  }
  s.periods = periods.size();
  return s;
}

PropertyReport check(const Trace& trace, const Scenario& scenario) {
  const WnSParams& p = scenario.wns.params;
  PropertyReport report;
  for (int n = 0; n < 7; ++n) report.properties[n].name = "WnS" + std::to_string(n + 1);
  auto& wns1 = report.properties[0];
  auto& wns2 = report.properties[1];
  auto& wns3 = report.properties[2];
  auto& wns4 = report.properties[3];
  auto& wns5 = report.properties[4];
  auto& wns6 = report.properties[5];
  auto& wns7 = report.properties[6];

  std::map<TxId, TxInfo> txs;
  std::vector<DeliveryView> deliveries;
  std::set<std::pair<TxId, NodeId>> signalled;
  std::map<NodeId, SimTime> departed;  // node -> time it last left
  std::vector<std::pair<const ev::ChannelFailed*, SimTime>> failures;
  std::map<std::pair<NodeId, std::uint8_t>, std::uint64_t> open_messages;  // MsgStart index
  const SimTime trace_end = trace.empty() ? 0 : trace.back().time;

  for (const auto& r : trace) {
    if (const auto* e = std::get_if<ev::TxStart>(&r.event)) {
      auto& t = txs[e->tx];
      t.start = e;
      t.start_index = r.index;
    } else if (const auto* e = std::get_if<ev::TxEnd>(&r.event)) {
      auto it = txs.find(e->tx);
      if (it == txs.end()) throw TraceFormatError(r.index + 1, "TxEnd without TxStart");
      it->second.end_time = r.time;
      it->second.end_index = r.index;
    } else if (const auto* e = std::get_if<ev::Deliver>(&r.event)) {
      deliveries.push_back(DeliveryView{e, r.index, r.time, !decodes_cleanly(*e)});
    } else if (const auto* e = std::get_if<ev::OmissionInjected>(&r.event)) {
      txs[e->tx].omissions.push_back(e);
    } else if (const auto* e = std::get_if<ev::SignalEmitted>(&r.event)) {
      signalled.insert({e->tx, e->signal.observer});
    } else if (const auto* e = std::get_if<ev::MembershipChange>(&r.event)) {
      if (!e->joined) departed[e->node] = r.time;
    } else if (const auto* e = std::get_if<ev::ChannelFailed>(&r.event)) {
      failures.emplace_back(e, r.time);
    } else if (const auto* e = std::get_if<ev::MsgStart>(&r.event)) {
      open_messages[{e->src, e->seq}] = r.index;
    } else if (const auto* e = std::get_if<ev::MsgDone>(&r.event)) {
      open_messages.erase({e->src, e->seq});
      const bool excused = e->detail == "sender departed" || e->detail == "sender is not a member" ||
                           e->detail == "deadline infeasible";
      if (!e->success && !excused) {
        fail(wns7, r.index, "message " + std::to_string(e->src) + "/" + std::to_string(e->seq) + " failed: " + e->detail);
      } else if (e->success && e->elapsed > wc_bound(p)) {
        fail(wns7, r.index, "message took " + std::to_string(e->elapsed) + " > wc_bound " + std::to_string(wc_bound(p)));
      }
    }
  }
  for (const auto& [id, index] : open_messages) {
    const SimTime started = trace.at(index).time;
    if (trace_end >= started + wc_bound(p)) fail(wns7, index, "message never completed within wc_bound");
  }

  // WnS1: clean copies equal what was sent.
  std::map<TxId, const Bytes*> first_clean;
  for (const auto& d : deliveries) {
    if (d.corrupted) continue;
    auto t = txs.find(d.d->tx);
    if (t == txs.end() || !t->second.start) throw TraceFormatError(d.index + 1, "Deliver without TxStart");
    if (d.d->bytes != t->second.start->bytes) {
      fail(wns1, d.index, "node " + std::to_string(d.d->receiver) + " received a different frame for tx " +
                              std::to_string(d.d->tx));
      continue;
    }
    auto [it, fresh] = first_clean.emplace(d.d->tx, &d.d->bytes);
    if (!fresh && *it->second != d.d->bytes) fail(wns1, d.index, "copies of tx " + std::to_string(d.d->tx) + " differ");
  }

  // WnS2: common clean receptions in the same order at every pair of nodes.
  std::map<NodeId, std::vector<const DeliveryView*>> seq;
  std::map<NodeId, std::set<TxId>> got;
  for (const auto& d : deliveries) {
    if (d.corrupted || !got[d.d->receiver].insert(d.d->tx).second) continue;
    seq[d.d->receiver].push_back(&d);
  }
  for (auto a = seq.begin(); a != seq.end(); ++a) {
    for (auto b = std::next(a); b != seq.end(); ++b) {
      std::vector<const DeliveryView*> sa, sb;
      for (const auto* d : a->second) {
        if (got[b->first].contains(d->d->tx)) sa.push_back(d);
      }
      for (const auto* d : b->second) {
        if (got[a->first].contains(d->d->tx)) sb.push_back(d);
      }
      for (std::size_t n = 0; n < sa.size(); ++n) {
        if (sa[n]->d->tx != sb[n]->d->tx) {
          fail(wns2, std::max(sa[n]->index, sb[n]->index),
               "nodes " + std::to_string(a->first) + " and " + std::to_string(b->first) + " disagree on order");
          break;
        }
      }
    }
  }

  // WnS3: a loopback request yields a self-delivery unless an omission hit the sender.
  std::set<TxId> self_delivered;
  for (const auto& d : deliveries) {
    if (txs.count(d.d->tx) && txs.at(d.d->tx).start && d.d->receiver == txs.at(d.d->tx).start->src) {
      self_delivered.insert(d.d->tx);
    }
  }
  for (const auto& [tx, t] : txs) {
    if (!t.start || !t.start->loopback || !t.end_time || self_delivered.contains(tx)) continue;
    const NodeId src = t.start->src;
    const bool covered = std::any_of(t.omissions.begin(), t.omissions.end(), [&](const ev::OmissionInjected* o) {
      return std::find(o->victims.begin(), o->victims.end(), src) != o->victims.end();
    });
    auto left = departed.find(src);
    const bool gone = left != departed.end() && left->second <= *t.end_time;
    if (!covered && !gone) fail(wns3, t.start_index, "no loopback copy of tx " + std::to_string(tx));
  }

  // WnS4: every corrupted reception is signalled by its receiver.
  for (const auto& d : deliveries) {
    if (d.corrupted && !signalled.contains({d.d->tx, d.d->receiver})) {
      fail(wns4, d.index, "corrupted tx " + std::to_string(d.d->tx) + " at node " + std::to_string(d.d->receiver) +
                              " went unsignalled");
    }
  }

  // WnS5: more than k omitted transmissions in a window require a channel failure.
  std::map<ChannelId, std::vector<std::pair<SimTime, std::uint64_t>>> omitted;  // (time, record index)
  std::set<TxId> counted;
  for (const auto& r : trace) {
    const auto* o = std::get_if<ev::OmissionInjected>(&r.event);
    if (!o || o->cause == ev::OmissionCause::Inaccessibility || o->victims.empty()) continue;
    if (!counted.insert(o->tx).second) continue;
    omitted[o->channel].emplace_back(r.time, r.index);
  }
  for (const auto& [channel, list] : omitted) {
    for (std::size_t a = 0; a < list.size(); ++a) {
      std::size_t b = a;
      while (b < list.size() && list[b].first < list[a].first + p.tau_rd) ++b;
      if (b - a <= p.k) continue;
      const SimTime last = list[b - 1].first;
      const bool switched = std::any_of(failures.begin(), failures.end(), [&](const auto& f) {
        // fail-stop: a declaration made before the window still covers it
        return f.first->channel == channel && f.second <= last + p.tau_ina;
      });
      if (!switched) {
        for (std::size_t n = a; n < b; ++n) {
          fail(wns5, list[n].second,
               std::to_string(b - a) + " omissions on channel " + std::to_string(channel) +
                   " within tau_rd and no channel failure declared");
        }
      }
    }
  }

  // WnS6
  const InaAccount ina = account(trace, p);
  for (const auto& v : ina.violations) {
    for (auto index : v.indices) {
      fail(wns6, index,
           std::to_string(v.count) + " periods totalling " + std::to_string(v.total) + " symbols in window [" +
               std::to_string(v.window_start) + ", " + std::to_string(v.window_end) + ")");
    }
  }

  // WnS7, frame level.
  for (const auto& [tx, t] : txs) {
    if (t.start && t.end_time && *t.end_time - t.start->requested > p.tau_td + p.tau_ina) {
      fail(wns7, t.end_index, "tx " + std::to_string(tx) + " ended " + std::to_string(*t.end_time - t.start->requested) +
                                  " symbols after its request");
    }
  }
  for (auto& prop : report.properties) std::sort(prop.counterexample.begin(), prop.counterexample.end());

  report.summary = summarize(trace);
  return report;
}

std::string to_json(const PropertyReport& r) {
  nlohmann::ordered_json j;
  j["pass"] = r.all_pass();
  nlohmann::ordered_json props = nlohmann::ordered_json::object();
  for (const auto& p : r.properties) {
    nlohmann::ordered_json x;
    x["verdict"] = p.pass ? "pass" : "fail";
    if (!p.pass) {
      x["counterexample"] = p.counterexample;
      x["detail"] = p.detail;
    }
    props[p.name] = x;
  }
  j["properties"] = props;
  const auto& s = r.summary;
  j["summary"] = {{"frames", s.frames},   {"deliveries", s.deliveries}, {"omissions", s.omissions},
                  {"signals", s.signals}, {"switches", s.switches},     {"periods", s.periods},
                  {"messages", s.messages}, {"messages_ok", s.messages_ok}};
  return j.dump(2) + "\n";
}

}  // namespace wnslab
