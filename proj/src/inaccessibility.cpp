#include "wnslab/inaccessibility.hpp"

#include <algorithm>
#include <map>

#include "wnslab/frame.hpp"
#include "wnslab/medium.hpp"

namespace wnslab {

std::vector<std::string> validate(const MacParams& p) {
  std::vector<std::string> out;
  if (p.BO > 14) out.emplace_back("BO <= 14");
  if (p.SO > p.BO) out.emplace_back("SO <= BO");
  if (p.base_superframe == 0) out.emplace_back("base_superframe > 0");
  if (p.max_lost_beacons == 0) out.emplace_back("max_lost_beacons >= 1");
  if (p.channels == 0) out.emplace_back("channels >= 1");
  return out;
}

std::string_view to_string(InaScenario s) {
  switch (s) {
    case InaScenario::BeaconLoss: return "beacon_loss";
    case InaScenario::SyncLossRejoin: return "sync_loss_rejoin";
    case InaScenario::ChannelSwitchBlackout: return "channel_switch_blackout";
  }
  return "?";
}

std::optional<InaScenario> ina_scenario_from_string(std::string_view s) {
  for (InaScenario x : kAllInaScenarios) {
    if (to_string(x) == s) return x;
  }
  return std::nullopt;
}

SwitchContext default_switch_context() {
  WnSParams p{2, 1, 2, 1, 4000, 400, 3000};
  return SwitchContext{p, default_switch_config(p)};
}

SimTime beacon_interval(const MacParams& p) { return p.base_superframe << p.BO; }

SimTime worst_case(InaScenario s, const MacParams& p, bool mitigated, const SwitchContext& sw) {
  if (auto bad = validate(p); !bad.empty()) throw std::invalid_argument("invalid MAC parameters: " + bad.front());
  const SimTime bi = beacon_interval(p);
  const SimTime detect = p.max_lost_beacons * bi;
  switch (s) {
    case InaScenario::BeaconLoss:
      return mitigated ? detect / 2 : detect;
    case InaScenario::SyncLossRejoin:
      if (mitigated) return detect / 2 + p.scan_duration_per_channel + bi;
      return detect + p.channels * p.scan_duration_per_channel + bi;
    case InaScenario::ChannelSwitchBlackout: {
      if (!mitigated) return switch_worst_case(sw.params, sw.cfg);
      Frame announce;
      announce.kind = FrameKind::Switch;
      announce.payload.resize(2);
      const SimTime hops = static_cast<SimTime>(sw.params.f) * (sw.cfg.hop_time + sw.cfg.t_beacon_wait);
      return sw.cfg.repetitions * airtime(announce) + hops;
    }
  }
  return 0;
}

std::vector<AnalysisRow> analysis_rows(std::uint32_t bo_lo, std::uint32_t bo_hi) {
  std::vector<AnalysisRow> rows;
  for (InaScenario s : kAllInaScenarios) {
    for (std::uint32_t bo = bo_lo; bo <= bo_hi; ++bo) {
      MacParams p;
      p.BO = bo;
      p.SO = bo;
      rows.push_back(AnalysisRow{s, bo, bo, worst_case(s, p, false), worst_case(s, p, true)});
    }
  }
  return rows;
}

InaAccount account(const Trace& trace, const WnSParams& params) {
  InaAccount out;
  std::map<std::uint32_t, InaPeriod> open;
  std::map<std::uint32_t, bool> seen;
  for (const auto& r : trace) {
    if (const auto* s = std::get_if<ev::InaccessStart>(&r.event)) {
      if (seen[s->period]) {
        throw InaAccountError("trace record " + std::to_string(r.index) + ": period " +
                              std::to_string(s->period) + " started twice");
      }
      seen[s->period] = true;
      open[s->period] = InaPeriod{s->period, r.time, 0, s->cause, r.index, 0};
    } else if (const auto* e = std::get_if<ev::InaccessEnd>(&r.event)) {
      auto it = open.find(e->period);
      if (it == open.end()) {
        throw InaAccountError("trace record " + std::to_string(r.index) + ": end of period " +
                              std::to_string(e->period) + " without a start");
      }
      InaPeriod p = it->second;
      open.erase(it);
      p.end = r.time;
      p.end_index = r.index;
      if (p.end <= p.start) {
        throw InaAccountError("trace record " + std::to_string(r.index) + ": empty period " +
                              std::to_string(p.id));
      }
      out.periods.push_back(p);
    }
  }
  if (!open.empty()) {
    throw InaAccountError("period " + std::to_string(open.begin()->first) + " never ends");
  }
  std::stable_sort(out.periods.begin(), out.periods.end(),
                   [](const InaPeriod& a, const InaPeriod& b) { return a.start < b.start; });

  for (std::size_t a = 0; a < out.periods.size(); ++a) {
    if (a > 0 && out.periods[a].start == out.periods[a - 1].start) continue;
    InaViolation w;
    w.window_start = out.periods[a].start;
    w.window_end = w.window_start + params.tau_rd;
    for (std::size_t b = a; b < out.periods.size() && out.periods[b].start < w.window_end; ++b) {
      ++w.count;
      w.total += out.periods[b].duration();
      w.indices.push_back(out.periods[b].start_index);
    }
    if (w.count > params.i || w.total > params.tau_ina) out.violations.push_back(std::move(w));
  }
  return out;
}

}  // namespace wnslab
