#pragma once

// Wire format:
//   byte 0     kind
//   byte 1     seq
//   byte 2     round
//   bytes 3-4  src     (little-endian)
//   bytes 5-6  wns_id  (little-endian)
//   payload    (length implied by the frame size)
//   2-byte FCS (little-endian) over all preceding bytes

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wnslab/model.hpp"

namespace wnslab {

using Bytes = std::vector<std::uint8_t>;

enum class FrameKind : std::uint8_t { Data = 0, Confirm = 1, Switch = 2, Beacon = 3 };

inline constexpr std::size_t kHeaderBytes = 7;
inline constexpr std::size_t kFcsBytes = 2;
inline constexpr std::size_t kMaxPayload = 114;
inline constexpr std::size_t kMinFrameBytes = kHeaderBytes + kFcsBytes;
inline constexpr std::size_t kMaxFrameBytes = 127;

struct Frame {
  FrameKind kind = FrameKind::Data;
  std::uint8_t seq = 0;
  std::uint8_t round = 0;
  NodeId src = 0;
  std::uint16_t wns_id = 0;
  Bytes payload;
  friend bool operator==(const Frame&, const Frame&) = default;
};

enum class OmissionReason { FcsMismatch, MissingExpectedFrame, Inaccessibility };

struct OmissionSignal {
  ChannelId channel = 0;
  SimTime time = 0;
  NodeId observer = 0;
  OmissionReason reason = OmissionReason::FcsMismatch;
  friend bool operator==(const OmissionSignal&, const OmissionSignal&) = default;
};

/// Where and by whom a frame was received; copied into any signal produced.
struct RxContext {
  ChannelId channel = 0;
  SimTime time = 0;
  NodeId observer = 0;
};

class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view to_string(FrameKind k);
std::optional<FrameKind> frame_kind_from_string(std::string_view s);
std::string_view to_string(OmissionReason r);
std::optional<OmissionReason> omission_reason_from_string(std::string_view s);

/// CRC-16, generator x^16+x^12+x^5+1, init 0, reflected in/out (802.15.4 FCS).
std::uint16_t compute_fcs(std::span<const std::uint8_t> data);

std::size_t encoded_length(const Frame& f);
Bytes encode(const Frame& f);

using DecodeResult = std::variant<Frame, OmissionSignal>;

/// A frame whose FCS does not match yields an fcs_mismatch signal carrying
/// `ctx`. Inputs shorter than the minimal frame or longer than the maximal
/// one throw CodecError.
DecodeResult decode(std::span<const std::uint8_t> bytes, const RxContext& ctx);

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(std::string_view hex);

}  // namespace wnslab
