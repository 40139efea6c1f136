#pragma once

// Worst-case inaccessibility of a beacon-enabled 802.15.4-style MAC, and
// accounting of the inaccessibility periods stamped in a trace.
//
// The closed forms are a simplified model, not values from the standard:
//   BeaconLoss             L*BI                      mitigated  L*BI/2
//   SyncLossRejoin         L*BI + n*scan + BI        mitigated  L*BI/2 + scan + BI
//   ChannelSwitchBlackout  T_silence + f*(hop+T_bw)  mitigated  reps*airtime(SWITCH) + f*(hop+T_bw)
// where L = max_lost_beacons and n = channels scanned on a full rejoin.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wnslab/channel_layer.hpp"
#include "wnslab/model.hpp"
#include "wnslab/trace.hpp"

namespace wnslab {

struct MacParams {
  std::uint32_t BO = 0;
  std::uint32_t SO = 0;
  SimTime base_superframe = 960;
  std::uint32_t max_lost_beacons = 4;
  SimTime scan_duration_per_channel = 8640;  // 960 * (2^3 + 1)
  std::uint32_t channels = 16;
};

/// Empty when 0 <= SO <= BO <= 14 and the counts are positive.
std::vector<std::string> validate(const MacParams& p);

enum class InaScenario { BeaconLoss, SyncLossRejoin, ChannelSwitchBlackout };
inline constexpr InaScenario kAllInaScenarios[] = {InaScenario::BeaconLoss, InaScenario::SyncLossRejoin,
                                                   InaScenario::ChannelSwitchBlackout};

std::string_view to_string(InaScenario s);
std::optional<InaScenario> ina_scenario_from_string(std::string_view s);

/// Channel-layer configuration the switch blackout is computed for.
struct SwitchContext {
  WnSParams params;
  SwitchConfig cfg;
};
SwitchContext default_switch_context();

/// base_superframe * 2^BO
SimTime beacon_interval(const MacParams& p);

/// Throws std::invalid_argument for invalid MacParams.
SimTime worst_case(InaScenario s, const MacParams& p, bool mitigated,
                   const SwitchContext& sw = default_switch_context());

struct AnalysisRow {
  InaScenario scenario = InaScenario::BeaconLoss;
  std::uint32_t BO = 0;
  std::uint32_t SO = 0;
  SimTime unmitigated = 0;
  SimTime mitigated = 0;
  double ratio() const { return static_cast<double>(mitigated) / static_cast<double>(unmitigated); }
};

/// One row per scenario and BO in [bo_lo, bo_hi], SO = BO, other MacParams
/// at their defaults. Scenario-major order.
std::vector<AnalysisRow> analysis_rows(std::uint32_t bo_lo, std::uint32_t bo_hi);

struct InaPeriod {
  std::uint32_t id = 0;
  SimTime start = 0;
  SimTime end = 0;
  ev::InaCause cause = ev::InaCause::Injected;
  std::size_t start_index = 0;  // trace indices of the stamps
  std::size_t end_index = 0;
  SimTime duration() const { return end - start; }
};

struct InaViolation {
  SimTime window_start = 0;
  SimTime window_end = 0;  // exclusive
  std::uint32_t count = 0;
  SimTime total = 0;
  std::vector<std::size_t> indices;  // InaccessStart records in the window
};

struct InaAccount {
  std::vector<InaPeriod> periods;  // ordered by start
  std::vector<InaViolation> violations;
  bool holds() const { return violations.empty(); }
};

class InaAccountError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Windows of length tau_rd are anchored at every period start; a window
/// holds the periods that start inside it and is violated when it has more
/// than i of them or their durations add up to more than tau_ina.
/// Throws InaAccountError for unbalanced or duplicated stamps.
InaAccount account(const Trace& trace, const WnSParams& params);

}  // namespace wnslab
