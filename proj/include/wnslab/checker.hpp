#pragma once

// Trace-side verification of the seven abstract-channel properties.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wnslab/scenario.hpp"
#include "wnslab/trace.hpp"

namespace wnslab {

struct PropertyResult {
  std::string name;  // "WnS1" .. "WnS7"
  bool pass = true;
  std::vector<std::uint64_t> counterexample;  // trace indices
  std::string detail;
};

struct TraceSummary {
  std::uint64_t frames = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t omissions = 0;  // OmissionInjected records
  std::uint64_t signals = 0;
  std::uint64_t switches = 0;   // ChannelSwitch records
  std::uint64_t periods = 0;    // inaccessibility periods
  std::uint64_t messages = 0;
  std::uint64_t messages_ok = 0;
};

struct PropertyReport {
  std::array<PropertyResult, 7> properties;
  TraceSummary summary;
  bool all_pass() const;
  std::vector<std::string> failed() const;
  const PropertyResult& operator[](int property) const { return properties.at(property - 1); }
};

/// Read-only over the trace. Throws TraceFormatError or InaAccountError for a
/// malformed trace.
PropertyReport check(const Trace& trace, const Scenario& scenario);

TraceSummary summarize(const Trace& trace);

/// Report as a JSON document.
std::string to_json(const PropertyReport& r);

}  // namespace wnslab
