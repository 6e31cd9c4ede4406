#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "elot/geometry.hpp"
#include "elot/localization.hpp"
#include "elot/rng.hpp"

namespace elot {

inline constexpr int kChannelMin = 11;
inline constexpr int kChannelMax = 26;
inline constexpr int kBackhaulChannel = 21;  // reserved for the AN/HAN backbone

inline bool is_mn_channel(int channel) {
  return channel >= kChannelMin && channel <= kChannelMax &&
         channel != kBackhaulChannel;
}

// Zone -> channel assignment. Adjacent zones get distinct channels and a
// channel is reused only across zones at least reuse_min_distance_m apart.
struct ChannelPlan {
  std::map<int, int> assignments;
  double reuse_min_distance_m = 0.0;
};

ChannelPlan allocate_channels(const std::vector<Zone>& zones,
                              const std::vector<std::pair<int, int>>& adjacency,
                              const std::vector<int>& available_channels,
                              double reuse_min_distance_m);

// Zone pairs whose rectangles touch along an edge of positive length.
std::vector<std::pair<int, int>> derive_adjacency(const std::vector<Zone>& zones);

// Slotted forwarding offsets: the i-th anchor (1-based) starts at
// T_i + i*T_w/N_a with T_i drawn uniformly inside one slot width.
struct BackoffSchedule {
  double window_s = 0.0;
  int slot_count = 0;
  std::vector<double> starts;
};

BackoffSchedule backoff_schedule(int n_anchors, double window_s, RngStream& rng);

enum class LinkMode { scanning, associated, switching };

struct MnLinkState {
  int mn_id = 0;
  LinkMode mode = LinkMode::scanning;
  std::optional<int> current_channel;
  std::optional<int> pending_channel;
};

// Throws InvariantViolationError; called on every transition.
void check_link_invariants(const MnLinkState& state);

// Channel access scan: try 11..26 in order, skipping the backhaul channel,
// and associate with the first channel that is active at the node's position.
MnLinkState scan_and_access(const MnLinkState& state,
                            const std::vector<int>& active_channels);

struct SwitchDecision {
  std::optional<int> target_channel;
  bool isolated = false;  // link is weak but the zone has no neighbour
};

// Server-side switching rule: when fewer than min_anchor_count anchors of the
// serving zone still hear the node above rss_threshold_dbm, pick the adjacent
// zone whose centroid best matches the node's recent heading.
SwitchDecision evaluate_switch(const std::vector<Rssi>& zone_anchor_rss,
                               int rss_threshold_dbm, int min_anchor_count,
                               const std::vector<Position>& position_history,
                               int current_zone_id,
                               const std::vector<Zone>& zones,
                               const std::vector<std::pair<int, int>>& adjacency,
                               const ChannelPlan& plan);

// Server issued a switch command that is still in flight.
MnLinkState mark_switch_pending(const MnLinkState& state, int channel);

// Command reached the node: retune and schedule one re-association beacon.
MnLinkState apply_switch(const MnLinkState& state, int channel);

// One frame on the air, and the nodes that should receive it.
struct FrameTx {
  int channel = 0;
  double start_s = 0.0;
  double duration_s = 0.0;
  Position tx_location;
  std::vector<int> receivers;
};

// Hard-collision medium: a frame is lost at a receiver iff another frame on
// the same channel overlaps it in time and the receiver lies within
// interference range of the other transmitter. No capture.
std::vector<std::vector<bool>> resolve_collisions(
    const std::vector<FrameTx>& frames,
    const std::map<int, Position>& receiver_locations,
    double interference_range_m);

}  // namespace elot
