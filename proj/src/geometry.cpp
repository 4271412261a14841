#include "taskplan/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace taskplan {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double min_distance_moving(Point a0, Point a1, Point b0, Point b1) {
  const double dx = a0.x - b0.x;
  const double dy = a0.y - b0.y;
  const double vx = (a1.x - a0.x) - (b1.x - b0.x);
  const double vy = (a1.y - a0.y) - (b1.y - b0.y);
  const double vv = vx * vx + vy * vy;
  double s = 0.0;
  if (vv > 0.0) s = std::clamp(-(dx * vx + dy * vy) / vv, 0.0, 1.0);
  return std::hypot(dx + s * vx, dy + s * vy);
}

}  // namespace taskplan
