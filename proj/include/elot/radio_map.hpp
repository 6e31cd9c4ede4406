#pragma once

#include <optional>
#include <vector>

#include "elot/geometry.hpp"

namespace elot {

// Quantized RSS indicator. nullopt marks an anchor that did not hear the
// beacon; substitution with the floor value happens only at match time.
using Rssi = std::optional<int>;

inline constexpr int kRssiFloorDbm = -70;
inline constexpr int kRssiCeilDbm = -10;

// Round to nearest integer, ties toward -inf.
inline int round_half_down(double x) {
  return static_cast<int>(std::ceil(x - 0.5));
}

struct Fingerprint {
  int grid_index = 0;
  Position location;
  std::vector<Rssi> rss;  // one entry per anchor
};

struct AnchorSite {
  int id = 0;
  Position location;
};

// The offline fingerprint database: one fingerprint per grid point plus the
// anchor layout the RSS vectors are indexed against.
struct RadioMap {
  ReferenceGrid grid;
  std::vector<Fingerprint> fingerprints;  // ordered by grid index
  std::vector<AnchorSite> anchors;

  int size() const { return static_cast<int>(fingerprints.size()); }
  int anchor_count() const { return static_cast<int>(anchors.size()); }
};

// Robust per-anchor averaging of raw scans: drop the trim_count samples
// farthest from the median, average the rest, round half toward -inf.
// An anchor with no samples at all comes back unheard.
std::vector<Rssi> build_fingerprint(
    const std::vector<std::vector<int>>& per_anchor_samples, int trim_count);

RadioMap assemble_radio_map(ReferenceGrid grid,
                            std::vector<Fingerprint> fingerprints,
                            std::vector<AnchorSite> anchors);

}  // namespace elot
