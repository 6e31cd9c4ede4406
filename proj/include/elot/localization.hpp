#pragma once

#include <vector>

#include "elot/radio_map.hpp"

namespace elot {

// One online RSS vector as heard across all anchors of the scenario.
struct Measurement {
  int mn_id = 0;
  std::vector<Rssi> rss;
  double timestamp_s = 0.0;
};

struct SelectedReference {
  int grid_index = 0;
  double distance_db = 0.0;
  double weight = 0.0;
};

struct MatchResult {
  Position estimate;
  std::vector<SelectedReference> selected;  // non-decreasing distance
  int k_used = 0;
  bool degenerate = false;  // fallback path was taken (map too small)
};

// Signal-space distance: Euclidean norm over all coordinates after
// substituting the RSSI floor for unheard entries on either side.
// low_confidence is set when no anchor was heard in both vectors.
struct RssDistance {
  double db = 0.0;
  bool low_confidence = false;
};

RssDistance rss_distance(const std::vector<Rssi>& fingerprint_rss,
                         const std::vector<Rssi>& query_rss);

// Below this distance a reference counts as an exact match.
inline constexpr double kDistanceEpsilonDb = 1e-6;

// Unweighted nearest-neighbour average over the k closest references.
MatchResult knn_estimate(const RadioMap& map, const Measurement& m, int k);

// Inverse-distance weighted average over the k closest references. An exact
// match (distance under kDistanceEpsilonDb) returns that reference alone.
MatchResult wknn_estimate(const RadioMap& map, const Measurement& m, int k);

struct AwknnParams {
  double gamma0_offset_db = 1.0;  // added to the smallest distance to seed the threshold
  double delta_db = 1.0;          // threshold adjustment step
  double theta_l = 3.0;           // spread ratio above which the threshold shrinks
  double theta_s = 1.2;           // spread ratio below which the threshold grows
  int max_iters = 50;
};

void validate_params(const AwknnParams& params);

// Adaptive WKNN: iteratively re-thresholds the candidate set until the
// spread ratio between the largest and smallest selected distances settles
// between theta_s and theta_l, then weights the survivors like WKNN.
// Maps with fewer than 4 references fall back to WKNN over the whole map.
MatchResult awknn_estimate(const RadioMap& map, const Measurement& m,
                           const AwknnParams& params = {});

}  // namespace elot
