#include "wnslab/model.hpp"

#include <cmath>

namespace wnslab {

bool valid_range(const CommRange& r) {
  return std::isfinite(r.semi_major) && std::isfinite(r.semi_minor) && r.semi_minor > 0.0 &&
         r.semi_major >= r.semi_minor;
}

bool point_in_range(Point p, const CommRange& r) {
  const double dx = p.x - r.center.x;
  const double dy = p.y - r.center.y;
  const double c = std::cos(r.rotation);
  const double s = std::sin(r.rotation);
  // Rotate into the ellipse frame.
  const double u = (dx * c + dy * s) / r.semi_major;
  const double v = (-dx * s + dy * c) / r.semi_minor;
  // Slack absorbs the rounding of cos/sin so on-axis boundary points stay inside.
  return u * u + v * v <= 1.0 + 1e-12;
}

bool broadcast_domain_contains(Point p, ChannelId c, const WnS& w) {
  bool known = false;
  for (ChannelId ch : w.channels) known = known || ch == c;
  if (!known) throw ModelError("unknown channel id " + std::to_string(c));
  for (const auto& [id, member] : w.members) {
    auto it = member.ranges.find(c);
    if (it == member.ranges.end() || !point_in_range(p, it->second)) return false;
  }
  return true;
}

bool is_member(const Node& n, const WnS& w) {
  for (ChannelId c : w.channels) {
    if (broadcast_domain_contains(n.position, c, w)) return true;
  }
  return false;
}

WnS commit_membership(WnS w, const MembershipEvent& e) {
  if (const auto* join = std::get_if<Join>(&e)) {
    if (w.members.contains(join->node.id)) {
      throw ModelError("duplicate join of node " + std::to_string(join->node.id));
    }
    w.members.emplace(join->node.id, join->node);
    return w;
  }
  const auto& leave = std::get<Leave>(e);
  if (leave.id == w.coordinator_id) throw ModelError("the coordinator cannot leave its segment");
  if (w.members.erase(leave.id) == 0) {
    throw ModelError("leave of unknown node " + std::to_string(leave.id));
  }
  return w;
}

std::vector<std::string> validate(const WnSParams& p) {
  std::vector<std::string> out;
  if (p.tau_td == 0) out.emplace_back("tau_td > 0");
  if (p.tau_rd < 2 * p.tau_td) out.emplace_back("tau_rd >= 2*tau_td");
  if (p.k < p.f_o) out.emplace_back("k >= f_o");
  return out;
}

std::vector<std::string> validate(const WnS& w) {
  std::vector<std::string> out = validate(w.params);
  if (w.members.empty()) out.emplace_back("X nonempty");
  if (!w.members.contains(w.coordinator_id)) out.emplace_back("x_m ∈ X");
  if (w.channels.size() != static_cast<std::size_t>(w.params.f) + 1) out.emplace_back("#C = f+1");
  std::set<ChannelId> distinct(w.channels.begin(), w.channels.end());
  if (distinct.size() != w.channels.size()) out.emplace_back("channel ids distinct");
  for (const auto& [id, n] : w.members) {
    if (n.id != id) out.emplace_back("member key matches node id " + std::to_string(id));
    for (ChannelId c : w.channels) {
      auto it = n.ranges.find(c);
      if (it == n.ranges.end()) {
        out.emplace_back("node " + std::to_string(id) + " has a range on channel " + std::to_string(c));
      } else if (!valid_range(it->second)) {
        out.emplace_back("node " + std::to_string(id) + " range semi_major >= semi_minor > 0");
      }
    }
  }
  return out;
}

Node moved(Node n, Point to) {
  const double dx = to.x - n.position.x;
  const double dy = to.y - n.position.y;
  for (auto& [c, r] : n.ranges) {
    r.center.x += dx;
    r.center.y += dy;
  }
  n.position = to;
  return n;
}

}  // namespace wnslab
