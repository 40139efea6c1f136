#include "wnslab/frame.hpp"

#include <array>

namespace wnslab {
namespace {

// Reflected form of 0x1021.
constexpr std::uint16_t kReflectedPoly = 0x8408;

constexpr std::array<std::uint16_t, 256> make_table() {
  std::array<std::uint16_t, 256> table{};
  for (std::uint32_t b = 0; b < 256; ++b) {
    std::uint16_t crc = static_cast<std::uint16_t>(b);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 1U) ? static_cast<std::uint16_t>((crc >> 1) ^ kReflectedPoly)
                       : static_cast<std::uint16_t>(crc >> 1);
    }
    table[b] = crc;
  }
  return table;
}

constexpr auto kTable = make_table();

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string_view to_string(FrameKind k) {
  switch (k) {
    case FrameKind::Data: return "DATA";
    case FrameKind::Confirm: return "CONFIRM";
    case FrameKind::Switch: return "SWITCH";
    case FrameKind::Beacon: return "BEACON";
  }
  return "?";
}

std::optional<FrameKind> frame_kind_from_string(std::string_view s) {
  for (auto k : {FrameKind::Data, FrameKind::Confirm, FrameKind::Switch, FrameKind::Beacon}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(OmissionReason r) {
  switch (r) {
    case OmissionReason::FcsMismatch: return "fcs_mismatch";
    case OmissionReason::MissingExpectedFrame: return "missing_expected_frame";
    case OmissionReason::Inaccessibility: return "inaccessibility";
  }
  return "?";
}

std::optional<OmissionReason> omission_reason_from_string(std::string_view s) {
  for (auto r : {OmissionReason::FcsMismatch, OmissionReason::MissingExpectedFrame,
                 OmissionReason::Inaccessibility}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

std::uint16_t compute_fcs(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0;
  for (std::uint8_t b : data) crc = static_cast<std::uint16_t>((crc >> 8) ^ kTable[(crc ^ b) & 0xFFU]);
  return crc;
}

std::size_t encoded_length(const Frame& f) { return kMinFrameBytes + f.payload.size(); }

Bytes encode(const Frame& f) {
  if (f.payload.size() > kMaxPayload) {
    throw CodecError("payload of " + std::to_string(f.payload.size()) + " bytes exceeds " +
                     std::to_string(kMaxPayload));
  }
  Bytes out;
  out.reserve(encoded_length(f));
  out.push_back(static_cast<std::uint8_t>(f.kind));
  out.push_back(f.seq);
  out.push_back(f.round);
  out.push_back(static_cast<std::uint8_t>(f.src & 0xFFU));
  out.push_back(static_cast<std::uint8_t>(f.src >> 8));
  out.push_back(static_cast<std::uint8_t>(f.wns_id & 0xFFU));
  out.push_back(static_cast<std::uint8_t>(f.wns_id >> 8));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  const std::uint16_t fcs = compute_fcs(out);
  out.push_back(static_cast<std::uint8_t>(fcs & 0xFFU));
  out.push_back(static_cast<std::uint8_t>(fcs >> 8));
  return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes, const RxContext& ctx) {
  if (bytes.size() < kMinFrameBytes) {
    throw CodecError("frame of " + std::to_string(bytes.size()) + " bytes is shorter than " +
                     std::to_string(kMinFrameBytes));
  }
  if (bytes.size() > kMinFrameBytes + kMaxPayload) {
    throw CodecError("frame of " + std::to_string(bytes.size()) + " bytes exceeds the maximum");
  }
  const std::size_t body = bytes.size() - kFcsBytes;
  const std::uint16_t carried =
      static_cast<std::uint16_t>(bytes[body] | (static_cast<std::uint16_t>(bytes[body + 1]) << 8));
  if (compute_fcs(bytes.first(body)) != carried || bytes[0] > 3) {
    return OmissionSignal{ctx.channel, ctx.time, ctx.observer, OmissionReason::FcsMismatch};
  }
  Frame f;
  f.kind = static_cast<FrameKind>(bytes[0]);
  f.seq = bytes[1];
  f.round = bytes[2];
  f.src = static_cast<NodeId>(bytes[3] | (bytes[4] << 8));
  f.wns_id = static_cast<std::uint16_t>(bytes[5] | (bytes[6] << 8));
  f.payload.assign(bytes.begin() + kHeaderBytes, bytes.begin() + static_cast<std::ptrdiff_t>(body));
  return f;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xFU]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw CodecError("odd-length hex string");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = hex_value(hex[i]);
    const int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) throw CodecError("invalid hex digit");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

}  // namespace wnslab
