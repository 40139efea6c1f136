#pragma once

// Wireless network Segment: membership, channels, coordinator and the
// broadcast-domain geometry every frame delivery is tested against.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace wnslab {

using NodeId = std::uint16_t;
using ChannelId = std::uint16_t;
using SimTime = std::uint64_t;  // symbols; 1 symbol = 16 us

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Segment parameter block. All durations are in symbols.
struct WnSParams {
  std::uint32_t k = 0;       // omitted transmissions tolerated per tau_rd
  std::uint32_t i = 0;       // inaccessibility periods tolerated per tau_rd
  std::uint32_t f = 0;       // channels that may fail
  std::uint32_t f_o = 0;     // consecutive omissions before a component is failed
  SimTime tau_rd = 0;        // observation window
  SimTime tau_td = 0;        // error-free frame transmission delay
  SimTime tau_ina = 0;       // inaccessibility allowance per window
  friend bool operator==(const WnSParams&, const WnSParams&) = default;
};

/// Elliptic communication range, closed region.
struct CommRange {
  Point center;
  double semi_major = 1.0;
  double semi_minor = 1.0;
  double rotation = 0.0;  // radians, major axis angle from +x
  friend bool operator==(const CommRange&, const CommRange&) = default;
};

struct Node {
  NodeId id = 0;
  Point position;
  std::map<ChannelId, CommRange> ranges;
  bool coordinator = false;
  friend bool operator==(const Node&, const Node&) = default;
};

struct WnS {
  std::uint16_t id = 0;
  std::map<NodeId, Node> members;
  NodeId coordinator_id = 0;
  std::vector<ChannelId> channels;  // agreed switch order
  std::set<std::string> protocols;
  WnSParams params;
  friend bool operator==(const WnS&, const WnS&) = default;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Join {
  Node node;
};
struct Leave {
  NodeId id = 0;
};
using MembershipEvent = std::variant<Join, Leave>;

bool valid_range(const CommRange& r);
bool point_in_range(Point p, const CommRange& r);

/// Intersection of every member's range on channel `c`. Throws ModelError for
/// a channel outside the segment.
bool broadcast_domain_contains(Point p, ChannelId c, const WnS& w);

/// True iff the node's position lies in the broadcast domain of at least one
/// channel.
bool is_member(const Node& n, const WnS& w);

WnS commit_membership(WnS w, const MembershipEvent& e);

/// Each entry names the broken invariant; empty means valid.
std::vector<std::string> validate(const WnSParams& p);
std::vector<std::string> validate(const WnS& w);

/// Moves a node and carries its ranges along with it.
Node moved(Node n, Point to);

}  // namespace wnslab
