#include "taskplan/env.hpp"

#include <algorithm>
#include <string>

#include "taskplan/errors.hpp"

namespace taskplan {

namespace {

const GridGraph& graph_of(const RobotProfile& robot) {
  if (!robot.graph) throw ContractError("robot has no graph");
  return *robot.graph;
}

void require_vertex(const GridGraph& g, Cell c) {
  if (!g.contains(c))
    throw InvalidVertexError("vertex (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                             ") is not in the robot's graph");
}

double hops_or_throw(const RobotProfile& robot, DistanceCache& cache, Cell a, Cell b) {
  require_vertex(cache.graph(), a);
  require_vertex(cache.graph(), b);
  int h = cache.hops(a, b);
  if (h < 0) throw NoPathError("target unreachable from source");
  return h / robot.speed;
}

}  // namespace

Path direct_path(const RobotProfile& robot, Cell from, Cell to) {
  const GridGraph& g = graph_of(robot);
  require_vertex(g, from);
  require_vertex(g, to);
  // Walk back from `from` along a field rooted at `to`; ties take the lowest
  // neighbor index.
  auto dist = g.bfs(to);
  const GridMap& map = g.map();
  int cur = map.index(from);
  if (dist[cur] < 0) throw NoPathError("target unreachable from source");
  Path p;
  p.entries.push_back({from, 0.0});
  int nb[4];
  while (dist[cur] > 0) {
    int n = g.neighbors(cur, nb);
    for (int k = 0; k < n; ++k)
      if (dist[nb[k]] == dist[cur] - 1) {
        cur = nb[k];
        break;
      }
    p.entries.push_back({map.cell(cur), static_cast<double>(p.size()) / robot.speed});
  }
  return p;
}

double path_cost(const Path& path, const RobotProfile& robot) {
  const GridGraph& g = graph_of(robot);
  double edges = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const Cell c = path.entries[i].cell;
    if (!g.contains(c)) throw InvalidPathError("path visits a vertex outside the graph");
    if (i == 0) continue;
    if (!(path.entries[i].time > path.entries[i - 1].time))
      throw InvalidPathError("path times are not strictly increasing");
    const int step = manhattan(path.entries[i - 1].cell, c);
    if (step > 1) throw InvalidPathError("consecutive path entries are not edge-connected");
    edges += step;
  }
  return edges / robot.speed;
}

double insertion_delta(const RobotProfile& robot, Cell a, Cell b, Cell c) {
  DistanceCache cache(robot.graph);
  const double ab = hops_or_throw(robot, cache, a, b);
  const double bc = hops_or_throw(robot, cache, b, c);
  const double ac = hops_or_throw(robot, cache, a, c);
  return ab + bc - ac;
}

DistanceCache::DistanceCache(std::shared_ptr<const GridGraph> graph) : graph_(std::move(graph)) {
  if (!graph_) throw ContractError("distance cache needs a graph");
}

const std::vector<int>& DistanceCache::field(Cell source) {
  const int key = graph_->map().in_bounds(source) ? graph_->map().index(source) : -1;
  auto it = fields_.find(key);
  if (it != fields_.end()) return it->second;
  return fields_.emplace(key, graph_->bfs(source)).first->second;
}

int DistanceCache::hops(Cell a, Cell b) {
  if (!graph_->contains(a) || !graph_->contains(b)) return -1;
  // Prefer an existing field from either end; the graph is undirected.
  const GridMap& map = graph_->map();
  if (auto it = fields_.find(map.index(b)); it != fields_.end()) return it->second[map.index(a)];
  return field(a)[map.index(b)];
}

CostMatrix build_cost_matrix(const RobotProfile& robot, std::span<const Task> tasks,
                             std::optional<CarriedWork> carried) {
  DistanceCache cache(robot.graph);
  std::vector<Cell> locations;
  locations.reserve(tasks.size());
  for (const Task& t : tasks) locations.push_back(t.location);
  return build_cost_matrix(robot, robot.start, locations, carried, cache);
}

CostMatrix build_cost_matrix(const RobotProfile& robot, Cell from,
                             std::span<const Cell> task_locations,
                             std::optional<CarriedWork> carried, DistanceCache& cache) {
  const std::size_t m = task_locations.size();
  const double base = carried ? carried->remaining_cost : 0.0;
  CostMatrix c(robot.id, m, base);
  std::vector<Cell> points;
  points.reserve(m + 1);
  points.push_back(carried ? carried->last_assigned_task : from);
  points.insert(points.end(), task_locations.begin(), task_locations.end());

  for (std::size_t j = 0; j < points.size(); ++j) {
    for (std::size_t k = 1; k < points.size(); ++k) {
      if (j == k) continue;
      const int h = cache.hops(points[j], points[k]);
      c.at(j, k) = h < 0 ? kInfeasibleCost : h / robot.speed;
    }
  }
  if (carried)
    for (std::size_t k = 1; k < points.size(); ++k) c.at(0, k) += base;
  return c;
}

}  // namespace taskplan
