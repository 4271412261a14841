#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "taskplan/env.hpp"
#include "taskplan/geometry.hpp"
#include "taskplan/path.hpp"

namespace taskplan {

struct PlanWindow {
  int plan_horizon = 10;  // w
  int exec_horizon = 5;   // T_e, committed prefix

  bool valid() const { return exec_horizon >= 1 && plan_horizon >= exec_horizon; }
};

enum class ConflictKind { sphere, tunnel };

/// Sphere conflicts are reported at integer timestep t. Tunnel conflicts
/// cover (t, t+1): the robots are apart at both ends but their collision
/// spheres overlap while moving.
struct Conflict {
  std::size_t robot_a = 0;
  std::size_t robot_b = 0;
  int timestep = 0;
  ConflictKind kind = ConflictKind::sphere;
  Point a_from, a_to;  // a_from == a_to for sphere conflicts
  Point b_from, b_to;
};

/// Vertex constraint: `robot` may not be at `from` at `timestep`.
/// Edge constraint: `robot` may not move from `from` to `to` (a wait when
/// equal) between `timestep` and `timestep + 1`.
struct Constraint {
  std::size_t robot = 0;
  Cell from;
  Cell to;
  int timestep = 0;
  bool edge = false;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

/// All pairwise conflicts over the union of path time spans, ordered by
/// timestep. Positions are linear between waypoints; a robot holds its
/// first/last vertex outside its path's time span.
std::vector<Conflict> detect_conflicts(std::span<const Path> paths, std::span<const double> radii);

/// Time-expanded search over `horizon` steps that visits `goals` in order.
/// Cost is the completion time when every goal is reached within the
/// horizon, otherwise horizon plus the remaining direct distance through
/// the goals. Ties prefer fewer waits. Returns nullopt when no path
/// satisfies the constraints.
std::optional<Path> low_level_search(const RobotProfile& robot, Cell start,
                                     std::span<const Cell> goals,
                                     std::span<const Constraint> constraints, int horizon,
                                     std::span<const Cell> blocked);

/// Window objective of a single path, as minimised by low_level_search.
double window_cost(const RobotProfile& robot, const Path& path, std::span<const Cell> goals,
                   int horizon, std::span<const Cell> blocked);

struct WindowPlan {
  bool ok = false;
  std::vector<Path> paths;  // plan_horizon + 1 entries each, one per timestep
  double cost = 0.0;
  std::size_t expansions = 0;
};

inline constexpr std::size_t kDefaultNodeBudget = 10'000;

/// Conflict-based search restricted to the planning horizon. Each robot
/// treats `blocked` (minus its own start) as static obstacles. On budget
/// exhaustion `ok` is false and every robot waits in place.
WindowPlan plan_window(std::span<const RobotProfile> robots, std::span<const Cell> starts,
                       std::span<const std::vector<Cell>> goal_sequences, PlanWindow window,
                       std::span<const Cell> blocked,
                       std::size_t node_budget = kDefaultNodeBudget);

struct RobotProgress {
  double start_distance = 0.0;  // remaining direct cost at window start
  double end_distance = 0.0;    // remaining direct cost of the same work at window end
  bool has_tasks = false;
};

/// Every robot with tasks when the team's summed progress over the window
/// is below `progress_epsilon`; otherwise empty.
std::vector<std::size_t> detect_deadlock(std::span<const RobotProgress> progress,
                                         double progress_epsilon);

}  // namespace taskplan
