#include "elot/netproto.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace elot {

ChannelPlan allocate_channels(const std::vector<Zone>& zones,
                              const std::vector<std::pair<int, int>>& adjacency,
                              const std::vector<int>& available_channels,
                              double reuse_min_distance_m) {
  for (int c : available_channels) {
    if (!is_mn_channel(c)) {
      throw InvalidParameterError("channel " + std::to_string(c) +
                                  " not usable for zone assignment");
    }
  }
  std::vector<int> channels = available_channels;
  std::sort(channels.begin(), channels.end());
  channels.erase(std::unique(channels.begin(), channels.end()), channels.end());

  std::map<int, std::set<int>> neighbours;
  for (const auto& [a, b] : adjacency) {
    neighbours[a].insert(b);
    neighbours[b].insert(a);
  }

  std::vector<const Zone*> ordered;
  ordered.reserve(zones.size());
  for (const auto& z : zones) ordered.push_back(&z);
  std::sort(ordered.begin(), ordered.end(),
            [](const Zone* a, const Zone* b) { return a->id < b->id; });

  ChannelPlan plan;
  plan.reuse_min_distance_m = reuse_min_distance_m;
  for (const Zone* z : ordered) {
    const auto& adj = neighbours[z->id];
    int chosen = 0;
    for (int c : channels) {
      bool ok = true;
      for (const auto& [other_id, other_channel] : plan.assignments) {
        if (other_channel != c) continue;
        if (adj.count(other_id)) {
          ok = false;
          break;
        }
        const Zone* other = nullptr;
        for (const Zone* cand : ordered) {
          if (cand->id == other_id) other = cand;
        }
        if (distance(z->polygon.centroid(), other->polygon.centroid()) <
            reuse_min_distance_m) {
          ok = false;
          break;
        }
      }
      if (ok) {
        chosen = c;
        break;
      }
    }
    if (chosen == 0) {
      throw AllocationInfeasibleError("no feasible channel for zone " +
                                      std::to_string(z->id));
    }
    plan.assignments[z->id] = chosen;
  }
  return plan;
}

std::vector<std::pair<int, int>> derive_adjacency(
    const std::vector<Zone>& zones) {
  std::vector<std::pair<int, int>> adj;
  for (std::size_t i = 0; i < zones.size(); ++i) {
    for (std::size_t j = i + 1; j < zones.size(); ++j) {
      if (zones[i].polygon.shares_border(zones[j].polygon)) {
        adj.emplace_back(zones[i].id, zones[j].id);
      }
    }
  }
  return adj;
}

BackoffSchedule backoff_schedule(int n_anchors, double window_s,
                                 RngStream& rng) {
  if (n_anchors < 1 || !(window_s > 0.0)) {
    throw InvalidParameterError("backoff: need n_anchors >= 1 and window > 0");
  }
  BackoffSchedule s;
  s.window_s = window_s;
  s.slot_count = n_anchors;
  const double slot = window_s / n_anchors;
  s.starts.reserve(n_anchors);
  for (int i = 1; i <= n_anchors; ++i) {
    s.starts.push_back(rng.uniform(0.0, slot) + i * slot);
  }
  return s;
}

void check_link_invariants(const MnLinkState& state) {
  if (state.mode == LinkMode::associated && !state.current_channel) {
    throw InvariantViolationError("MN " + std::to_string(state.mn_id) +
                                  " associated without a channel");
  }
  if (state.mode == LinkMode::switching && !state.pending_channel) {
    throw InvariantViolationError("MN " + std::to_string(state.mn_id) +
                                  " switching without a pending channel");
  }
  for (const auto& ch : {state.current_channel, state.pending_channel}) {
    if (ch && !is_mn_channel(*ch)) {
      throw InvariantViolationError("MN " + std::to_string(state.mn_id) +
                                    " holds illegal channel " +
                                    std::to_string(*ch));
    }
  }
}

MnLinkState scan_and_access(const MnLinkState& state,
                            const std::vector<int>& active_channels) {
  if (state.mode != LinkMode::scanning) {
    throw ProtocolViolationError("scan attempted while not scanning");
  }
  MnLinkState next = state;
  for (int c = kChannelMin; c <= kChannelMax; ++c) {
    if (c == kBackhaulChannel) continue;
    if (std::find(active_channels.begin(), active_channels.end(), c) !=
        active_channels.end()) {
      next.mode = LinkMode::associated;
      next.current_channel = c;
      next.pending_channel.reset();
      break;
    }
  }
  check_link_invariants(next);
  return next;  // still scanning when nothing answered; retry is scheduled
}

SwitchDecision evaluate_switch(const std::vector<Rssi>& zone_anchor_rss,
                               int rss_threshold_dbm, int min_anchor_count,
                               const std::vector<Position>& position_history,
                               int current_zone_id,
                               const std::vector<Zone>& zones,
                               const std::vector<std::pair<int, int>>& adjacency,
                               const ChannelPlan& plan) {
  if (position_history.size() < 2) {
    throw InvalidParameterError("switch evaluation needs position history");
  }
  int strong = 0;
  for (const Rssi& r : zone_anchor_rss) {
    if (r && *r >= rss_threshold_dbm) ++strong;
  }
  if (strong >= min_anchor_count) return {};

  std::set<int> neighbour_ids;
  for (const auto& [a, b] : adjacency) {
    if (a == current_zone_id) neighbour_ids.insert(b);
    if (b == current_zone_id) neighbour_ids.insert(a);
  }
  if (neighbour_ids.empty()) {
    return {.target_channel = std::nullopt, .isolated = true};
  }

  const Position& here = position_history.back();
  const Position& prev = position_history[position_history.size() - 2];
  const double hx = here.x - prev.x;
  const double hy = here.y - prev.y;
  const double hn = std::hypot(hx, hy);

  // Cosine alignment between the heading and the direction to each
  // neighbouring zone centroid; ties and a zero heading fall back to the
  // lowest zone id.
  int best_zone = 0;
  double best_score = -2.0;
  for (const Zone& z : zones) {
    if (!neighbour_ids.count(z.id)) continue;
    const Position c = z.polygon.centroid();
    const double dx = c.x - here.x;
    const double dy = c.y - here.y;
    const double dn = std::hypot(dx, dy);
    double score = 0.0;
    if (hn > 0.0 && dn > 0.0) {
      score = (hx * dx + hy * dy) / (hn * dn);
    }
    if (score > best_score + 1e-12 ||
        (std::abs(score - best_score) <= 1e-12 && z.id < best_zone)) {
      best_score = score;
      best_zone = z.id;
    }
  }

  const auto it = plan.assignments.find(best_zone);
  if (it == plan.assignments.end()) {
    throw InvariantViolationError("zone " + std::to_string(best_zone) +
                                  " has no channel assignment");
  }
  return {.target_channel = it->second, .isolated = false};
}

MnLinkState mark_switch_pending(const MnLinkState& state, int channel) {
  if (channel == kBackhaulChannel) {
    throw ProtocolViolationError("switch command names the backhaul channel");
  }
  if (state.mode != LinkMode::associated) {
    throw ProtocolViolationError("switch issued while not associated");
  }
  MnLinkState next = state;
  next.mode = LinkMode::switching;
  next.pending_channel = channel;
  check_link_invariants(next);
  return next;
}

MnLinkState apply_switch(const MnLinkState& state, int channel) {
  if (channel == kBackhaulChannel) {
    throw ProtocolViolationError("switch command names the backhaul channel");
  }
  if (state.mode == LinkMode::scanning) {
    throw ProtocolViolationError("switch command received while scanning");
  }
  MnLinkState next = state;
  next.mode = LinkMode::associated;
  next.current_channel = channel;
  next.pending_channel.reset();
  check_link_invariants(next);
  return next;
}

std::vector<std::vector<bool>> resolve_collisions(
    const std::vector<FrameTx>& frames,
    const std::map<int, Position>& receiver_locations,
    double interference_range_m) {
  for (const auto& f : frames) {
    if (!(f.duration_s > 0.0)) {
      throw InvalidParameterError("frame duration must be positive");
    }
  }
  std::vector<std::vector<bool>> delivered(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    delivered[i].assign(f.receivers.size(), true);
    for (std::size_t j = 0; j < frames.size(); ++j) {
      if (j == i) continue;
      const auto& g = frames[j];
      if (g.channel != f.channel) continue;
      const bool overlap = g.start_s < f.start_s + f.duration_s &&
                           f.start_s < g.start_s + g.duration_s;
      if (!overlap) continue;
      for (std::size_t r = 0; r < f.receivers.size(); ++r) {
        const auto it = receiver_locations.find(f.receivers[r]);
        if (it == receiver_locations.end()) {
          throw InvalidParameterError("unknown receiver " +
                                      std::to_string(f.receivers[r]));
        }
        if (distance(it->second, g.tx_location) <= interference_range_m) {
          delivered[i][r] = false;
        }
      }
    }
  }
  return delivered;
}

}  // namespace elot
