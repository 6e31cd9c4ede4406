#include "elot/radio_map.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace elot {

ReferenceGrid make_reference_grid(const Rect& bounds, double spacing) {
  if (!(spacing > 0.0)) {
    throw InvalidGeometryError("grid spacing must be positive");
  }
  if (!std::isfinite(bounds.xmin) || !std::isfinite(bounds.ymin) ||
      !std::isfinite(bounds.xmax) || !std::isfinite(bounds.ymax) ||
      bounds.xmax < bounds.xmin || bounds.ymax < bounds.ymin) {
    throw InvalidGeometryError("degenerate grid bounds");
  }

  // Epsilon absorbs binary representation error in extent/spacing so that a
  // point landing exactly on the max corner is kept.
  const double eps = 1e-9;
  const int nx = static_cast<int>(std::floor(bounds.width() / spacing + eps)) + 1;
  const int ny = static_cast<int>(std::floor(bounds.height() / spacing + eps)) + 1;

  ReferenceGrid grid;
  grid.spacing = spacing;
  grid.points.reserve(static_cast<std::size_t>(nx) * ny);
  int index = 1;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      grid.points.push_back(
          {index++, {bounds.xmin + ix * spacing, bounds.ymin + iy * spacing}});
    }
  }
  return grid;
}

namespace {

double median_of(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

std::vector<Rssi> build_fingerprint(
    const std::vector<std::vector<int>>& per_anchor_samples, int trim_count) {
  if (trim_count < 0) {
    throw InvalidParameterError("trim_count must be non-negative");
  }
  if (per_anchor_samples.empty()) {
    throw InsufficientDataError("no sample vectors given");
  }

  std::vector<Rssi> out;
  out.reserve(per_anchor_samples.size());
  for (std::size_t a = 0; a < per_anchor_samples.size(); ++a) {
    const auto& samples = per_anchor_samples[a];
    if (samples.empty()) {
      out.push_back(std::nullopt);  // anchor never heard the test node
      continue;
    }
    if (static_cast<int>(samples.size()) < trim_count + 1) {
      throw InsufficientDataError("anchor " + std::to_string(a) + ": " +
                                  std::to_string(samples.size()) +
                                  " samples cannot survive trim of " +
                                  std::to_string(trim_count));
    }

    const double med = median_of(samples);
    // Largest |sample - median| goes first; ties ordered by value so the
    // result does not depend on scan order.
    std::vector<int> ordered = samples;
    std::sort(ordered.begin(), ordered.end(), [&](int a, int b) {
      const double da = std::abs(a - med);
      const double db = std::abs(b - med);
      if (da != db) return da > db;
      return a < b;
    });

    double sum = 0.0;
    const std::size_t kept = ordered.size() - static_cast<std::size_t>(trim_count);
    for (std::size_t k = trim_count; k < ordered.size(); ++k) {
      sum += ordered[k];
    }
    out.push_back(round_half_down(sum / static_cast<double>(kept)));
  }
  return out;
}

RadioMap assemble_radio_map(ReferenceGrid grid,
                            std::vector<Fingerprint> fingerprints,
                            std::vector<AnchorSite> anchors) {
  const std::size_t n = anchors.size();
  std::set<int> anchor_ids;
  for (const auto& a : anchors) {
    if (!anchor_ids.insert(a.id).second) {
      throw InconsistentMapError("duplicate anchor id " + std::to_string(a.id));
    }
  }

  if (fingerprints.size() != grid.points.size()) {
    throw InconsistentMapError(
        "fingerprint count " + std::to_string(fingerprints.size()) +
        " does not match grid size " + std::to_string(grid.points.size()));
  }

  std::sort(fingerprints.begin(), fingerprints.end(),
            [](const Fingerprint& a, const Fingerprint& b) {
              return a.grid_index < b.grid_index;
            });
  for (std::size_t i = 0; i < fingerprints.size(); ++i) {
    auto& fp = fingerprints[i];
    const auto& gp = grid.points[i];
    if (fp.grid_index != gp.index) {
      throw InconsistentMapError("grid index " + std::to_string(gp.index) +
                                 " has no unique fingerprint");
    }
    if (fp.rss.size() != n) {
      throw InconsistentMapError(
          "fingerprint " + std::to_string(fp.grid_index) + " has dimension " +
          std::to_string(fp.rss.size()) + ", expected " + std::to_string(n));
    }
    for (const Rssi& r : fp.rss) {
      if (r && (*r < kRssiFloorDbm || *r > kRssiCeilDbm)) {
        throw InconsistentMapError("fingerprint " +
                                   std::to_string(fp.grid_index) +
                                   ": RSSI out of range");
      }
    }
    fp.location = gp.location;
  }

  RadioMap map;
  map.grid = std::move(grid);
  map.fingerprints = std::move(fingerprints);
  map.anchors = std::move(anchors);
  return map;
}

}  // namespace elot
