#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "elot/errors.hpp"

namespace elot {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Position& a, const Position& b) {
  return a.x == b.x && a.y == b.y;
}

inline double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Axis-aligned rectangle given by its min and max corners.
struct Rect {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }

  bool contains(const Position& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }

  Position centroid() const {
    return {(xmin + xmax) / 2.0, (ymin + ymax) / 2.0};
  }

  // Distance from an interior point to the nearest border; 0 on the border.
  double border_distance(const Position& p) const {
    return std::max(0.0, std::min({p.x - xmin, xmax - p.x, p.y - ymin, ymax - p.y}));
  }

  // Positive-area overlap with another rect.
  bool interior_overlaps(const Rect& o) const {
    const double w = std::min(xmax, o.xmax) - std::max(xmin, o.xmin);
    const double h = std::min(ymax, o.ymax) - std::max(ymin, o.ymin);
    return w > 0.0 && h > 0.0;
  }

  // Zero-area contact along an edge of positive length.
  bool shares_border(const Rect& o) const {
    const double w = std::min(xmax, o.xmax) - std::max(xmin, o.xmin);
    const double h = std::min(ymax, o.ymax) - std::max(ymin, o.ymin);
    return (w == 0.0 && h > 0.0) || (h == 0.0 && w > 0.0);
  }
};

struct Zone {
  int id = 0;
  Rect polygon;
  std::vector<int> anchor_ids;
  int head_anchor_id = 0;
};

inline void validate_zone(const Zone& z) {
  if (!(z.polygon.area() > 0.0)) {
    throw InvalidGeometryError("zone " + std::to_string(z.id) +
                               ": polygon must have positive area");
  }
  if (std::find(z.anchor_ids.begin(), z.anchor_ids.end(), z.head_anchor_id) ==
      z.anchor_ids.end()) {
    throw InvalidGeometryError("zone " + std::to_string(z.id) +
                               ": head anchor not in anchor list");
  }
}

struct GridPoint {
  int index = 0;  // 1-based, contiguous
  Position location;
};

struct ReferenceGrid {
  std::vector<GridPoint> points;
  double spacing = 0.0;

  int size() const { return static_cast<int>(points.size()); }
};

// Row-major grid anchored at the bounds' minimum corner. A line or a single
// point is a legal (1-D or 0-D) grid; inverted or non-finite bounds are not.
ReferenceGrid make_reference_grid(const Rect& bounds, double spacing);

}  // namespace elot
