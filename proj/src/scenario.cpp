#include "elot/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace elot {

std::vector<int> default_mn_channels() {
  std::vector<int> out;
  for (int c = kChannelMin; c <= kChannelMax; ++c) {
    if (c != kBackhaulChannel) out.push_back(c);
  }
  return out;
}

namespace {

bool inside_some_zone(const std::vector<Zone>& zones, const Position& p) {
  return std::any_of(zones.begin(), zones.end(), [&](const Zone& z) {
    return z.polygon.contains(p);
  });
}

void validate_route(const Scenario& s, const MobileConfig& mn) {
  const Route& route = mn.route;
  const std::string who = "mobile " + std::to_string(mn.id);
  if (!inside_some_zone(s.zones, route.start)) {
    throw ConfigError(who + ": route start outside every zone");
  }
  Position prev = route.start;
  for (const RouteLeg& leg : route.legs) {
    if (!(leg.speed_mps > 0.0)) {
      throw ConfigError(who + ": leg speed must be positive");
    }
    // Sample each leg at half-metre steps; zones are rectangles, so this
    // resolution is plenty at desk scale.
    const double len = distance(prev, leg.to);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.5)));
    for (int i = 1; i <= steps; ++i) {
      const double f = static_cast<double>(i) / steps;
      const Position p{prev.x + f * (leg.to.x - prev.x),
                       prev.y + f * (leg.to.y - prev.y)};
      if (!inside_some_zone(s.zones, p)) {
        throw ConfigError(who + ": route leaves the zone union");
      }
    }
    prev = leg.to;
  }
}

}  // namespace

void validate_scenario(const Scenario& s) {
  if (!(s.duration_s > 0.0)) {
    throw ConfigError("duration_s must be positive");
  }
  if (s.zones.empty()) throw ConfigError("at least one zone required");
  if (s.anchors.empty()) throw ConfigError("at least one anchor required");

  std::set<int> zone_ids;
  for (const Zone& z : s.zones) {
    try {
      validate_zone(z);
    } catch (const InvalidGeometryError& e) {
      throw ConfigError(e.what());
    }
    if (!zone_ids.insert(z.id).second) {
      throw ConfigError("duplicate zone id " + std::to_string(z.id));
    }
  }
  for (std::size_t i = 0; i < s.zones.size(); ++i) {
    for (std::size_t j = i + 1; j < s.zones.size(); ++j) {
      if (s.zones[i].polygon.interior_overlaps(s.zones[j].polygon)) {
        throw ConfigError("zones " + std::to_string(s.zones[i].id) + " and " +
                          std::to_string(s.zones[j].id) + " overlap");
      }
    }
  }

  std::set<int> anchor_ids;
  for (const AnchorSite& a : s.anchors) {
    if (!anchor_ids.insert(a.id).second) {
      throw ConfigError("duplicate anchor id " + std::to_string(a.id));
    }
  }
  std::set<int> assigned;
  for (const Zone& z : s.zones) {
    for (int id : z.anchor_ids) {
      if (!anchor_ids.count(id)) {
        throw ConfigError("zone " + std::to_string(z.id) +
                          " references unknown anchor " + std::to_string(id));
      }
      if (!assigned.insert(id).second) {
        throw ConfigError("anchor " + std::to_string(id) +
                          " assigned to more than one zone");
      }
    }
  }

  for (const auto& [a, b] : s.adjacency) {
    if (!zone_ids.count(a) || !zone_ids.count(b)) {
      throw ConfigError("adjacency references unknown zone");
    }
  }

  try {
    validate_model(s.propagation);
    validate_model(s.energy.model);
    validate_params(s.localization.awknn);
  } catch (const InvalidParameterError& e) {
    throw ConfigError(e.what());
  }
  if (s.localization.algorithm != "knn" && s.localization.algorithm != "wknn" &&
      s.localization.algorithm != "awknn") {
    throw ConfigError("unknown localization algorithm '" +
                      s.localization.algorithm + "'");
  }
  if (s.localization.k < 1) throw ConfigError("localization k must be >= 1");

  for (int c : s.channel.available) {
    if (!is_mn_channel(c)) {
      throw ConfigError("channel " + std::to_string(c) +
                        " outside 11..26 or reserved for the backhaul");
    }
  }
  if (!(s.channel.backoff_window_s > 0.0)) {
    throw ConfigError("backoff_window_s must be positive");
  }

  if (s.radio_map.synthesize) {
    if (!(s.radio_map.spacing_m > 0.0)) {
      throw ConfigError("radio_map.spacing_m must be positive");
    }
    if (s.radio_map.scans_per_point <= s.radio_map.trim_count) {
      throw ConfigError("radio_map.scans_per_point must exceed trim_count");
    }
  } else if (s.radio_map.dir.empty()) {
    throw ConfigError("radio_map.dir required when reading a map from disk");
  }

  if (s.mobiles.empty()) throw ConfigError("at least one mobile required");
  std::set<int> mn_ids;
  for (const MobileConfig& mn : s.mobiles) {
    if (!mn_ids.insert(mn.id).second) {
      throw ConfigError("duplicate mobile id " + std::to_string(mn.id));
    }
    if (anchor_ids.count(mn.id)) {
      throw ConfigError("mobile id " + std::to_string(mn.id) +
                        " collides with an anchor id");
    }
    validate_route(s, mn);
  }
}

std::pair<Position, double> mobility_position(const Route& route, double t) {
  if (t < 0.0) throw InvalidParameterError("mobility time must be >= 0");
  Position pos = route.start;
  double clock = 0.0;
  for (const RouteLeg& leg : route.legs) {
    if (!(leg.speed_mps > 0.0)) {
      throw InvalidParameterError("route leg with non-positive speed");
    }
    const double len = distance(pos, leg.to);
    const double leg_time = len / leg.speed_mps;
    if (t < clock + leg_time) {
      const double f = (t - clock) / leg_time;
      return {{pos.x + f * (leg.to.x - pos.x), pos.y + f * (leg.to.y - pos.y)},
              leg.speed_mps};
    }
    pos = leg.to;
    clock += leg_time;
  }
  return {pos, 0.0};  // route finished: hold position
}

}  // namespace elot
