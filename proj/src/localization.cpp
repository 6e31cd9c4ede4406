#include "elot/localization.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace elot {

namespace {

void validate_measurement(const RadioMap& map, const Measurement& m) {
  if (m.rss.size() != static_cast<std::size_t>(map.anchor_count())) {
    throw InvalidParameterError(
        "measurement dimension " + std::to_string(m.rss.size()) +
        " does not match anchor count " + std::to_string(map.anchor_count()));
  }
  bool any_heard = false;
  for (const Rssi& r : m.rss) any_heard |= r.has_value();
  if (!any_heard) {
    throw InvalidParameterError("measurement heard no anchor");
  }
}

struct Candidate {
  int grid_index;
  std::size_t fp_pos;  // position in map.fingerprints
  double distance;
};

// All references ordered by (distance, grid index).
std::vector<Candidate> ranked_candidates(const RadioMap& map,
                                         const Measurement& m) {
  std::vector<Candidate> c;
  c.reserve(map.fingerprints.size());
  for (std::size_t i = 0; i < map.fingerprints.size(); ++i) {
    const auto& fp = map.fingerprints[i];
    c.push_back({fp.grid_index, i, rss_distance(fp.rss, m.rss).db});
  }
  std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.grid_index < b.grid_index;
  });
  return c;
}

void check_k(const RadioMap& map, int k) {
  if (k < 1 || k > map.size()) {
    throw InvalidParameterError("k = " + std::to_string(k) +
                                " outside [1, " + std::to_string(map.size()) +
                                "]");
  }
}

// Inverse-distance weights over a ranked prefix, normalized to sum 1.
MatchResult weighted_over_prefix(const RadioMap& map,
                                 const std::vector<Candidate>& ranked,
                                 std::size_t count) {
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    weight_sum += 1.0 / std::max(ranked[i].distance, kDistanceEpsilonDb);
  }
  MatchResult r;
  r.k_used = static_cast<int>(count);
  r.selected.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& c = ranked[i];
    const double w =
        (1.0 / std::max(c.distance, kDistanceEpsilonDb)) / weight_sum;
    r.selected.push_back({c.grid_index, c.distance, w});
    const Position& p = map.fingerprints[c.fp_pos].location;
    r.estimate.x += w * p.x;
    r.estimate.y += w * p.y;
  }
  return r;
}

}  // namespace

RssDistance rss_distance(const std::vector<Rssi>& fingerprint_rss,
                         const std::vector<Rssi>& query_rss) {
  if (fingerprint_rss.size() != query_rss.size()) {
    throw InvalidParameterError("RSS vectors differ in dimension");
  }
  double sum = 0.0;
  bool overlap = false;
  for (std::size_t j = 0; j < fingerprint_rss.size(); ++j) {
    const double a = fingerprint_rss[j] ? *fingerprint_rss[j] : kRssiFloorDbm;
    const double b = query_rss[j] ? *query_rss[j] : kRssiFloorDbm;
    overlap |= fingerprint_rss[j].has_value() && query_rss[j].has_value();
    sum += (a - b) * (a - b);
  }
  return {std::sqrt(sum), !overlap};
}

MatchResult knn_estimate(const RadioMap& map, const Measurement& m, int k) {
  check_k(map, k);
  validate_measurement(map, m);
  const auto ranked = ranked_candidates(map, m);

  MatchResult r;
  r.k_used = k;
  const double w = 1.0 / k;
  for (int i = 0; i < k; ++i) {
    const auto& c = ranked[i];
    r.selected.push_back({c.grid_index, c.distance, w});
    const Position& p = map.fingerprints[c.fp_pos].location;
    r.estimate.x += p.x * w;
    r.estimate.y += p.y * w;
  }
  return r;
}

MatchResult wknn_estimate(const RadioMap& map, const Measurement& m, int k) {
  check_k(map, k);
  validate_measurement(map, m);
  const auto ranked = ranked_candidates(map, m);

  // Exact match: the query sits on a reference, return it outright.
  if (ranked[0].distance < kDistanceEpsilonDb) {
    MatchResult r;
    r.k_used = 1;
    r.selected.push_back({ranked[0].grid_index, ranked[0].distance, 1.0});
    r.estimate = map.fingerprints[ranked[0].fp_pos].location;
    return r;
  }
  return weighted_over_prefix(map, ranked, static_cast<std::size_t>(k));
}

void validate_params(const AwknnParams& params) {
  if (!(params.delta_db > 0.0)) {
    throw InvalidParameterError("awknn: delta must be positive");
  }
  if (!(params.theta_l > params.theta_s) || !(params.theta_s >= 1.0)) {
    throw InvalidParameterError("awknn: need theta_l > theta_s >= 1");
  }
  if (params.max_iters < 1) {
    throw InvalidParameterError("awknn: max_iters must be >= 1");
  }
}

MatchResult awknn_estimate(const RadioMap& map, const Measurement& m,
                           const AwknnParams& params) {
  validate_params(params);
  if (map.size() < 4) {
    MatchResult r = wknn_estimate(map, m, map.size());
    r.degenerate = true;
    return r;
  }
  validate_measurement(map, m);
  const auto ranked = ranked_candidates(map, m);
  const double d_min = ranked[0].distance;

  // The threshold moves on the lattice gamma0 + step*delta; tracking the
  // integer step makes revisit detection exact.
  const double gamma0 = d_min + params.gamma0_offset_db;
  int step = 0;
  std::set<int> visited = {0};
  std::size_t last_good = 0;  // most recent selection with at least 4 members
  std::size_t accepted = 0;

  for (int iter = 0; iter < params.max_iters; ++iter) {
    const double gamma = gamma0 + step * params.delta_db;
    std::size_t n_r = 0;
    while (n_r < ranked.size() && ranked[n_r].distance <= gamma) ++n_r;
    if (n_r >= 4) last_good = n_r;

    if (n_r <= 3) {
      ++step;  // too few references for a valid fix
    } else {
      const double eps =
          ranked[n_r - 1].distance / std::max(d_min, kDistanceEpsilonDb);
      if (eps > params.theta_l) {
        --step;
      } else if (eps < params.theta_s) {
        ++step;
      } else {
        accepted = n_r;
        break;
      }
    }
    if (!visited.insert(step).second) {
      break;  // threshold oscillates; keep the last viable selection
    }
  }

  if (accepted == 0) {
    accepted = last_good >= 4 ? last_good : 4;
  }
  return weighted_over_prefix(map, ranked, accepted);
}

}  // namespace elot
