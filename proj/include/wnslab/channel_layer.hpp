#pragma once

// Channel monitoring and switching. Every node runs one ChannelAgent; the
// coordinator beacons every `beacon_cadence` symbols, members expect those
// beacons, and a channel whose consecutive omissions exceed k (or that falls
// silent for longer than T_silence) is abandoned for the next channel in the
// agreed order.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "wnslab/frame.hpp"
#include "wnslab/model.hpp"
#include "wnslab/trace.hpp"

namespace wnslab {

enum class Outcome { Ok, Omission };

struct OmissionCounter {
  ChannelId channel = 0;
  std::uint32_t consecutive = 0;
  std::deque<SimTime> window_events;
  std::optional<SimTime> last_observation;
};

/// Throws std::invalid_argument when `t` precedes the previous observation.
OmissionCounter observe(OmissionCounter counter, Outcome outcome, SimTime t, SimTime tau_rd);

/// consecutive > k
bool channel_failed(const OmissionCounter& counter, const WnSParams& params);

/// Circular successor in the agreed channel list. Throws
/// std::invalid_argument if `current` is not in the list.
ChannelId next_channel(ChannelId current, std::span<const ChannelId> channels);

struct ChannelStatus {
  std::optional<SimTime> failed_at;  // fail-stop: once set, never cleared
  bool failed() const { return failed_at.has_value(); }
};

struct SwitchConfig {
  SimTime t_silence = 0;
  SimTime t_beacon_wait = 0;
  SimTime beacon_cadence = 0;
  SimTime hop_time = 12;
  std::uint32_t repetitions = 1;
  friend bool operator==(const SwitchConfig&, const SwitchConfig&) = default;
};

/// T_silence = T_beacon_wait = 2*tau_td, cadence = tau_td, k+1 SWITCH frames.
SwitchConfig default_switch_config(const WnSParams& p);

/// T_silence + f * (hop + T_beacon_wait)
SimTime switch_worst_case(const WnSParams& p, const SwitchConfig& cfg);

/// Airtime of a beacon (2-byte payload) plus the 2-symbol guard.
SimTime beacon_slot();

enum class Role { Coordinator, Member };
enum class Trigger { LocalDetection, SwitchFrame, SilenceTimeout, BeaconWaitTimeout, TargetProbe };

std::string_view to_string(Trigger t);

struct SwitchState {
  enum class Mode { Idle, Switching } mode = Mode::Idle;
  ChannelId target = 0;
  SimTime deadline = 0;
  SimTime silence_timer = 0;
};

/// What a ChannelAgent needs from the world around it.
class ChannelPort {
 public:
  virtual ~ChannelPort() = default;
  virtual SimTime now() const = 0;
  virtual void send(NodeId self, const Frame& f, bool loopback) = 0;
  virtual void tune(NodeId self, ChannelId c) = 0;
  virtual void after(SimTime delay, std::function<void()> action) = 0;
  virtual void record(TraceEvent e) = 0;
  virtual bool inaccessible_during(SimTime a, SimTime b) const = 0;
  virtual std::optional<SimTime> last_inaccessibility_end(SimTime t) const = 0;
  virtual void switch_started(NodeId self) = 0;
  virtual void coordinator_arrived(ChannelId c) = 0;
  virtual void switch_completed(NodeId self) = 0;
  virtual void segment_failed(const std::string& reason) = 0;
};

class ChannelAgent {
 public:
  ChannelAgent(NodeId self, Role role, const WnS& segment, SwitchConfig cfg, ChannelPort& port,
               bool switching_enabled = true);

  NodeId id() const { return self_; }
  Role role() const { return role_; }
  ChannelId channel() const { return channel_; }
  bool switching() const { return state_.mode == SwitchState::Mode::Switching; }
  const OmissionCounter& counter() const { return counter_; }
  const SwitchState& state() const { return state_; }
  const std::map<ChannelId, ChannelStatus>& statuses() const { return status_; }

  /// Coordinator only: start-of-slot beacon.
  void beacon_tick(std::uint64_t tick);
  /// After the beacon slot of the tick that began at `tick_time`.
  void check_tick(SimTime tick_time);
  /// A well-formed frame arrived on the tuned channel.
  void on_frame(const Frame& f);
  /// A frame arrived but failed its FCS.
  void on_corrupted();
  /// Outcome of an expected exchange (e.g. a broadcast round) that spanned [a, b).
  void on_exchange(Outcome outcome, SimTime a, SimTime b);
  /// Node left the segment; stops all activity.
  void depart() { departed_ = true; }
  bool departed() const { return departed_; }
  /// Node re-entered the segment while the coordinator sits on `c`.
  void rejoin(ChannelId c);
  /// Coordinator waiting for its first beacon on a fresh channel.
  bool probing() const { return probing_; }

 private:
  void observe_outcome(Outcome o);
  bool counted_in(SimTime a, SimTime b) const;
  void trigger(Trigger why, std::optional<ChannelId> target = std::nullopt);
  void hop(ChannelId target);
  void arrive(ChannelId target);
  std::optional<ChannelId> next_usable(ChannelId from) const;
  void fail_current(Trigger why);
  Frame make(FrameKind k, std::uint8_t seq, ChannelId payload_channel) const;

  NodeId self_;
  Role role_;
  std::uint16_t wns_id_;
  std::vector<ChannelId> channels_;
  WnSParams params_;
  SwitchConfig cfg_;
  ChannelPort& port_;
  bool switching_enabled_;
  bool departed_ = false;

  ChannelId channel_;
  std::map<ChannelId, ChannelStatus> status_;
  OmissionCounter counter_;
  SwitchState state_;
  SimTime last_heard_ = 0;
  std::optional<SimTime> last_beacon_;
  std::optional<SimTime> last_corrupted_;  // one fault is counted once
  std::uint64_t wait_generation_ = 0;
  bool probing_ = false;  // coordinator: first beacon on a fresh channel
};

}  // namespace wnslab
