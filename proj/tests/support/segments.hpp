#pragma once

#include <cmath>
#include <vector>

#include "wnslab/model.hpp"

namespace fixture {

inline wnslab::Node node(wnslab::NodeId id, wnslab::Point p, const std::vector<wnslab::ChannelId>& channels,
                         double radius = 100.0) {
  wnslab::Node n;
  n.id = id;
  n.position = p;
  for (auto c : channels) n.ranges[c] = wnslab::CommRange{p, radius, radius, 0.0};
  return n;
}

/// `count` nodes on a small circle, ids 1..count, node 1 coordinates.
inline wnslab::WnS ring(int count, std::vector<wnslab::ChannelId> channels, wnslab::WnSParams params,
                        double radius = 100.0) {
  wnslab::WnS w;
  w.id = 7;
  w.channels = channels;
  w.protocols = {"mediator-broadcast"};
  w.params = params;
  for (int n = 0; n < count; ++n) {
    const double a = 6.283185307179586 * n / count;
    auto nd = node(static_cast<wnslab::NodeId>(n + 1), {5.0 * std::cos(a), 5.0 * std::sin(a)}, channels, radius);
    nd.coordinator = n == 0;
    w.members.emplace(nd.id, nd);
  }
  w.coordinator_id = 1;
  return w;
}

inline wnslab::WnSParams default_params(std::uint32_t f = 2) {
  return wnslab::WnSParams{2, 1, f, 1, 4000, 400, 3000};
}

}  // namespace fixture
