#pragma once

#include "taskplan/grid.hpp"

namespace taskplan {

/// Continuous position in cell units; cell (x, y) sits at point (x, y).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point to_point(Cell c) { return {static_cast<double>(c.x), static_cast<double>(c.y)}; }

double distance(Point a, Point b);

inline Point lerp(Point a, Point b, double s) {
  return {a.x + (b.x - a.x) * s, a.y + (b.y - a.y) * s};
}

/// Minimum over s in [0, 1] of |A(s) - B(s)| for two points moving linearly
/// and simultaneously from a0 to a1 and from b0 to b1.
double min_distance_moving(Point a0, Point a1, Point b0, Point b1);

}  // namespace taskplan
