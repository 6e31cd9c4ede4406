#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "elot/localization.hpp"
#include "elot/netproto.hpp"
#include "elot/propagation.hpp"
#include "elot/tracking.hpp"

namespace elot {

struct RouteLeg {
  Position to;
  double speed_mps = 0.0;
};

// Piecewise-linear walk: start point, then legs at per-segment speeds.
// The node holds its final position once the route is exhausted.
struct Route {
  Position start;
  std::vector<RouteLeg> legs;
};

struct MobileConfig {
  int id = 0;
  Route route;
};

// Where the radio map comes from: synthesized in the offline phase or read
// from a previously written map directory.
struct MapSource {
  bool synthesize = true;
  Rect bounds;
  double spacing_m = 1.2;
  int scans_per_point = 30;
  int trim_count = 3;
  std::string dir;
};

struct ChannelConfig {
  std::vector<int> available;  // defaults to 11..26 without the backhaul
  double reuse_min_distance_m = 30.0;
  double backoff_window_s = 0.12;
  int rss_threshold_dbm = -65;
  int min_anchor_count = 3;
  double interference_range_factor = 2.0;  // times the hearing range
  bool shared_channel_baseline = false;    // run as the traditional single-channel WSN
  bool compare_baseline = false;           // additionally run the baseline for PLR comparison
};

struct LocalizationConfig {
  std::string algorithm = "awknn";  // knn | wknn | awknn
  int k = 4;
  AwknnParams awknn;
};

struct TrackingConfig {
  bool adaptive_sounding = true;
  int required_consecutive = 3;
  double initial_transmit_period_s = 1.0;
  double initial_receive_period_s = 3.0;
  double edge_band_m = 2.0;
  int speed_window = kSpeedWindow;
};

struct EnergyConfig {
  EnergyModel model;
  double forward_duration_s = 2e-3;  // AN->HAN and HAN->SN frame airtime
  double receive_window_s = 10e-3;   // downlink listen window per wake
};

struct Scenario {
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  std::vector<Zone> zones;
  std::vector<AnchorSite> anchors;
  std::vector<std::pair<int, int>> adjacency;  // derived from zone borders when empty
  PropagationModel propagation;
  MapSource radio_map;
  ChannelConfig channel;
  LocalizationConfig localization;
  TrackingConfig tracking;
  EnergyConfig energy;
  std::vector<MobileConfig> mobiles;
};

std::vector<int> default_mn_channels();

// Full structural validation: zone geometry, anchor references, disjoint
// zone interiors, routes inside the zone union, channel sets.
void validate_scenario(const Scenario& scenario);

// Position and instantaneous speed along a route at time t.
std::pair<Position, double> mobility_position(const Route& route, double t);

}  // namespace elot
