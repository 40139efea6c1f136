#pragma once

// Scenario files: a JSON object with the keys
//
//   wns        {id, coordinator, channels, protocols?, params?, nodes}
//   switch     {t_silence?, t_beacon_wait?, beacon_cadence?, hop_time?, repetitions?}
//   faults     {omissions?, channel_failures?, inaccessibility?, moves?}
//   workload   [{sender, payload_size, send_time, deadline?}]
//   seed       integer, default 0
//   horizon    integer (symbols)
//   mutations  {disable_signalling?, disable_channel_layer?, drop_data_loopback?}
//
// Unknown keys anywhere are rejected. See README for the per-key defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wnslab/channel_layer.hpp"
#include "wnslab/medium.hpp"
#include "wnslab/model.hpp"

namespace wnslab {

struct WorkloadItem {
  NodeId sender = 0;
  std::size_t payload_size = 0;
  SimTime send_time = 0;
  std::optional<SimTime> deadline;
  friend bool operator==(const WorkloadItem&, const WorkloadItem&) = default;
};

struct Mutations {
  bool disable_signalling = false;
  bool disable_channel_layer = false;
  bool drop_data_loopback = false;
  friend bool operator==(const Mutations&, const Mutations&) = default;
};

struct Scenario {
  WnS wns;
  SwitchConfig switching;
  FaultScript faults;
  std::vector<WorkloadItem> workload;
  std::uint64_t seed = 0;
  SimTime horizon = 0;
  Mutations mutations;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ScenarioError for syntax errors (with the line number), unknown or
/// ill-typed keys, and any violation reported by validate(Scenario).
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& file);

/// Canonical form: every key present, defaults spelled out.
std::string emit_scenario(const Scenario& s);

/// Empty when the scenario is runnable.
std::vector<std::string> validate(const Scenario& s);

}  // namespace wnslab
