#pragma once

#include <cstddef>
#include <vector>

#include "taskplan/grid.hpp"

namespace taskplan {

struct Waypoint {
  Cell cell;
  double time = 0.0;

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

/// Ordered (vertex, time) sequence. Times strictly increase; consecutive
/// vertices are equal (a wait) or joined by a graph edge.
struct Path {
  std::vector<Waypoint> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  const Waypoint& front() const { return entries.front(); }
  const Waypoint& back() const { return entries.back(); }

  friend bool operator==(const Path&, const Path&) = default;
};

/// Joins two paths that share an endpoint. The second path is re-timed to
/// start where the first ends.
Path concatenate(const Path& head, const Path& tail);

/// Splits at entry `at`; both halves contain that entry.
std::pair<Path, Path> split(const Path& path, std::size_t at);

/// Position at integer timestep `t` for a path sampled one entry per
/// timestep starting at time 0. Holds the last vertex after the end.
Cell cell_at(const Path& path, int t);

}  // namespace taskplan
