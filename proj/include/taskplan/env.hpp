#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "taskplan/cost_matrix.hpp"
#include "taskplan/grid.hpp"
#include "taskplan/path.hpp"

namespace taskplan {

using RobotId = std::size_t;
using TaskId = std::size_t;

struct RobotProfile {
  RobotId id = 0;
  Cell start;
  double speed = 1.0;             // cells per timestep
  double collision_radius = 0.5;  // cell units
  std::shared_ptr<const GridGraph> graph;
};

struct Task {
  TaskId id = 0;
  Cell location;
  int created_at = 0;

  friend bool operator==(const Task&, const Task&) = default;
};

/// Shortest path on the robot's graph, timed at `speed`. Throws
/// InvalidVertexError for vertices outside the graph and NoPathError when
/// `to` is unreachable.
Path direct_path(const RobotProfile& robot, Cell from, Cell to);

/// Sum of edge lengths divided by speed. Throws InvalidPathError when two
/// consecutive entries are neither equal nor adjacent in the graph.
double path_cost(const Path& path, const RobotProfile& robot);

/// rho(a,b) + rho(b,c) - rho(a,c) over direct paths; never negative.
double insertion_delta(const RobotProfile& robot, Cell a, Cell b, Cell c);

/// Lazily computed single-source hop fields on one graph. Not thread-safe.
class DistanceCache {
public:
  explicit DistanceCache(std::shared_ptr<const GridGraph> graph);

  const GridGraph& graph() const { return *graph_; }
  const std::vector<int>& field(Cell source);
  /// Hop count between two cells, or -1 when disconnected or off-graph.
  int hops(Cell a, Cell b);

private:
  std::shared_ptr<const GridGraph> graph_;
  std::unordered_map<int, std::vector<int>> fields_;
};

/// Work a robot already holds when a matrix is built for new tasks.
struct CarriedWork {
  Cell last_assigned_task;
  double remaining_cost = 0.0;
};

CostMatrix build_cost_matrix(const RobotProfile& robot, std::span<const Task> tasks,
                             std::optional<CarriedWork> carried = std::nullopt);

/// Same as above but starting from `from` (ignored when carried work is
/// present) and reusing distance fields from `cache`, which must be built on
/// the robot's graph.
CostMatrix build_cost_matrix(const RobotProfile& robot, Cell from,
                             std::span<const Cell> task_locations,
                             std::optional<CarriedWork> carried, DistanceCache& cache);

}  // namespace taskplan
