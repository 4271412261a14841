#include "taskplan/mapf.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <memory>
#include <queue>
#include <unordered_set>

#include "taskplan/errors.hpp"

namespace taskplan {

namespace {

constexpr double kTouch = 1e-9;

Point position_at(const Path& path, double t) {
  const auto& e = path.entries;
  if (t <= e.front().time) return to_point(e.front().cell);
  if (t >= e.back().time) return to_point(e.back().cell);
  auto it = std::upper_bound(e.begin(), e.end(), t,
                             [](double v, const Waypoint& w) { return v < w.time; });
  const Waypoint& hi = *it;
  const Waypoint& lo = *(it - 1);
  const double s = (t - lo.time) / (hi.time - lo.time);
  return lerp(to_point(lo.cell), to_point(hi.cell), s);
}

// Minimum separation over [t0, t1], splitting at every waypoint time of
// either path so each piece is a pair of linear motions.
double min_separation(const Path& a, const Path& b, double t0, double t1) {
  std::vector<double> cuts{t0, t1};
  for (const Path* p : {&a, &b})
    for (const auto& w : p->entries)
      if (w.time > t0 && w.time < t1) cuts.push_back(w.time);
  std::sort(cuts.begin(), cuts.end());
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    best = std::min(best, min_distance_moving(position_at(a, cuts[i]), position_at(a, cuts[i + 1]),
                                              position_at(b, cuts[i]),
                                              position_at(b, cuts[i + 1])));
  }
  return best;
}

}  // namespace

std::vector<Conflict> detect_conflicts(std::span<const Path> paths, std::span<const double> radii) {
  if (radii.size() != paths.size()) throw ContractError("one radius per path is required");
  double end = 0.0;
  for (const auto& p : paths) {
    if (p.empty()) throw InvalidPathError("empty path");
    end = std::max(end, p.back().time);
  }
  const int horizon = static_cast<int>(std::ceil(end - kTouch));

  std::vector<Conflict> out;
  for (int t = 0; t <= horizon; ++t) {
    for (std::size_t i = 0; i < paths.size(); ++i)
      for (std::size_t j = i + 1; j < paths.size(); ++j) {
        const double reach = radii[i] + radii[j] - kTouch;
        const Point pi = position_at(paths[i], t), pj = position_at(paths[j], t);
        if (distance(pi, pj) < reach)
          out.push_back({i, j, t, ConflictKind::sphere, pi, pi, pj, pj});
      }
    if (t == horizon) break;
    for (std::size_t i = 0; i < paths.size(); ++i)
      for (std::size_t j = i + 1; j < paths.size(); ++j) {
        const double reach = radii[i] + radii[j] - kTouch;
        const Point a0 = position_at(paths[i], t), a1 = position_at(paths[i], t + 1);
        const Point b0 = position_at(paths[j], t), b1 = position_at(paths[j], t + 1);
        // Overlaps that touch an endpoint are already sphere conflicts.
        if (distance(a0, b0) < reach || distance(a1, b1) < reach) continue;
        if (min_separation(paths[i], paths[j], t, t + 1) < reach)
          out.push_back({i, j, t, ConflictKind::tunnel, a0, a1, b0, b1});
      }
  }
  return out;
}

namespace {

// Per-robot search data that does not depend on CBS constraints.
struct LowLevelContext {
  std::shared_ptr<const GridGraph> graph;
  std::vector<int> goals;                     // cell indices
  std::vector<std::vector<int>> goal_fields;  // hop field rooted at each goal
  std::vector<double> tail;                   // direct cost after reaching goal k
  double unreachable = 0.0;

  double remaining(int v, std::size_t k) const {
    const int d = goal_fields[k][static_cast<std::size_t>(v)];
    return (d < 0 ? unreachable : d) + tail[k];
  }
};

LowLevelContext make_context(const RobotProfile& robot, Cell start, std::span<const Cell> goals,
                             std::span<const Cell> blocked) {
  if (!robot.graph) throw ContractError("robot has no graph");
  if (robot.speed != 1.0) throw ContractError("window planning assumes unit-speed robots");
  LowLevelContext ctx;
  std::vector<Cell> all = robot.graph->blocked_cells();
  all.insert(all.end(), blocked.begin(), blocked.end());
  std::erase(all, start);
  ctx.graph = all.empty() ? std::make_shared<const GridGraph>(robot.graph->map_ptr())
                          : std::make_shared<const GridGraph>(robot.graph->map_ptr(), all);
  const GridMap& map = ctx.graph->map();
  ctx.unreachable = 4.0 * static_cast<double>(map.size());
  for (Cell g : goals) {
    ctx.goals.push_back(map.in_bounds(g) ? map.index(g) : -1);
    ctx.goal_fields.push_back(ctx.graph->bfs(g));
  }
  ctx.tail.assign(goals.size(), 0.0);
  for (std::size_t k = goals.size(); k-- > 1;) {
    const int prev = ctx.goals[k - 1];
    const int d = prev < 0 ? -1 : ctx.goal_fields[k][static_cast<std::size_t>(prev)];
    ctx.tail[k - 1] = ctx.tail[k] + (d < 0 ? ctx.unreachable : d);
  }
  return ctx;
}

struct Plan {
  Path path;
  double cost = 0.0;
};

struct Label {
  int done = INT_MAX;  // completion time, only meaningful once all goals are reached
  int waits = 0;       // waits before completion
  int moves = 0;       // moves after completion
  int parent = -1;
  bool set = false;

  bool better_than(const Label& o) const {
    if (!o.set) return true;
    if (done != o.done) return done < o.done;
    if (waits != o.waits) return waits < o.waits;
    return moves < o.moves;
  }
};

std::optional<Plan> search(const LowLevelContext& ctx, Cell start_cell,
                           std::span<const Constraint> constraints, int horizon) {
  const GridGraph& g = *ctx.graph;
  const GridMap& map = g.map();
  const int cells = static_cast<int>(map.size());
  const int goals = static_cast<int>(ctx.goals.size());
  const int levels = goals + 1;
  const long long states = static_cast<long long>(cells) * levels;

  std::unordered_set<long long> vertex_ban, edge_ban;
  for (const auto& c : constraints) {
    if (c.edge)
      edge_ban.insert((static_cast<long long>(c.timestep) * cells + map.index(c.from)) * cells +
                      map.index(c.to));
    else
      vertex_ban.insert(static_cast<long long>(c.timestep) * cells + map.index(c.from));
  }
  auto banned_at = [&](int v, int t) {
    return !vertex_ban.empty() && vertex_ban.count(static_cast<long long>(t) * cells + v);
  };
  auto banned_move = [&](int from, int to, int t) {
    return !edge_ban.empty() &&
           edge_ban.count((static_cast<long long>(t) * cells + from) * cells + to);
  };
  auto advance = [&](int k, int v) {
    while (k < goals && ctx.goals[static_cast<std::size_t>(k)] == v) ++k;
    return k;
  };

  const int start = map.index(start_cell);
  if (!g.contains(start) || banned_at(start, 0)) return std::nullopt;

  std::vector<Label> labels(static_cast<std::size_t>(states * (horizon + 1)));
  auto at = [&](int t, long long s) -> Label& {
    return labels[static_cast<std::size_t>(t * states + s)];
  };
  std::vector<long long> active, next;
  {
    const int k0 = advance(0, start);
    Label& l = at(0, static_cast<long long>(k0) * cells + start);
    l.set = true;
    if (k0 == goals) l.done = 0;
    active.push_back(static_cast<long long>(k0) * cells + start);
  }

  int nb[4];
  int options[5];
  for (int t = 0; t < horizon; ++t) {
    std::sort(active.begin(), active.end());
    next.clear();
    for (long long s : active) {
      const Label cur = at(t, s);
      const int v = static_cast<int>(s % cells);
      const int k = static_cast<int>(s / cells);
      // Candidate successors in ascending cell index, including the wait.
      const int n = g.neighbors(v, nb);
      int m = 0;
      bool placed = false;
      for (int i = 0; i < n; ++i) {
        if (!placed && nb[i] > v) {
          options[m++] = v;
          placed = true;
        }
        options[m++] = nb[i];
      }
      if (!placed) options[m++] = v;

      for (int i = 0; i < m; ++i) {
        const int u = options[i];
        if (banned_at(u, t + 1) || banned_move(v, u, t)) continue;
        const int k2 = advance(k, u);
        Label cand;
        cand.set = true;
        cand.parent = static_cast<int>(s);
        cand.done = k2 == goals ? (k == goals ? cur.done : t + 1) : INT_MAX;
        cand.waits = cur.waits + (u == v && k < goals ? 1 : 0);
        cand.moves = cur.moves + (u != v && k == goals ? 1 : 0);
        const long long s2 = static_cast<long long>(k2) * cells + u;
        Label& slot = at(t + 1, s2);
        if (!slot.set) next.push_back(s2);
        if (cand.better_than(slot)) slot = cand;
      }
    }
    active.swap(next);
    if (active.empty()) return std::nullopt;
  }

  std::sort(active.begin(), active.end());
  long long best = -1;
  double best_cost = INFINITY;
  for (long long s : active) {
    const Label& l = at(horizon, s);
    const int v = static_cast<int>(s % cells);
    const int k = static_cast<int>(s / cells);
    const double cost = k == goals ? l.done : horizon + ctx.remaining(v, static_cast<std::size_t>(k));
    if (best < 0 || cost < best_cost ||
        (cost == best_cost && (l.waits < at(horizon, best).waits ||
                               (l.waits == at(horizon, best).waits &&
                                l.moves < at(horizon, best).moves)))) {
      best = s;
      best_cost = cost;
    }
  }

  Plan plan;
  plan.cost = best_cost;
  plan.path.entries.resize(static_cast<std::size_t>(horizon) + 1);
  long long s = best;
  for (int t = horizon; t >= 0; --t) {
    plan.path.entries[static_cast<std::size_t>(t)] = {map.cell(static_cast<int>(s % cells)),
                                                      static_cast<double>(t)};
    s = at(t, s).parent;
  }
  return plan;
}

}  // namespace

std::optional<Path> low_level_search(const RobotProfile& robot, Cell start,
                                     std::span<const Cell> goals,
                                     std::span<const Constraint> constraints, int horizon,
                                     std::span<const Cell> blocked) {
  if (horizon < 0) throw ContractError("horizon must be non-negative");
  auto ctx = make_context(robot, start, goals, blocked);
  auto plan = search(ctx, start, constraints, horizon);
  if (!plan) return std::nullopt;
  return std::move(plan->path);
}

double window_cost(const RobotProfile& robot, const Path& path, std::span<const Cell> goals,
                   int horizon, std::span<const Cell> blocked) {
  if (path.empty()) throw InvalidPathError("empty path");
  auto ctx = make_context(robot, path.front().cell, goals, blocked);
  const GridMap& map = ctx.graph->map();
  std::size_t k = 0;
  for (int t = 0; t <= horizon; ++t) {
    const int v = map.index(cell_at(path, t));
    while (k < ctx.goals.size() && ctx.goals[k] == v) ++k;
    if (k == ctx.goals.size()) return t;
  }
  return horizon + ctx.remaining(map.index(cell_at(path, horizon)), k);
}

WindowPlan plan_window(std::span<const RobotProfile> robots, std::span<const Cell> starts,
                       std::span<const std::vector<Cell>> goal_sequences, PlanWindow window,
                       std::span<const Cell> blocked, std::size_t node_budget) {
  const std::size_t n = robots.size();
  if (starts.size() != n || goal_sequences.size() != n)
    throw ContractError("one start and one goal sequence per robot is required");
  if (!window.valid()) throw ContractError("execution horizon must lie in [1, plan horizon]");
  const int w = window.plan_horizon;

  std::vector<LowLevelContext> ctx;
  std::vector<double> radii;
  for (std::size_t r = 0; r < n; ++r) {
    ctx.push_back(make_context(robots[r], starts[r], goal_sequences[r], blocked));
    radii.push_back(robots[r].collision_radius);
  }

  WindowPlan fail;
  fail.ok = false;
  for (std::size_t r = 0; r < n; ++r) {
    Path p;
    for (int t = 0; t <= w; ++t) p.entries.push_back({starts[r], static_cast<double>(t)});
    fail.paths.push_back(std::move(p));
  }

  struct Node {
    std::vector<Constraint> constraints;
    std::vector<Path> paths;
    std::vector<double> costs;
    double cost = 0.0;
    std::vector<Conflict> conflicts;
  };
  std::vector<Node> nodes;
  auto order = [&nodes](std::size_t a, std::size_t b) {
    const Node& x = nodes[a];
    const Node& y = nodes[b];
    if (x.cost != y.cost) return x.cost > y.cost;
    if (x.conflicts.size() != y.conflicts.size()) return x.conflicts.size() > y.conflicts.size();
    return a > b;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(order)> open(order);

  {
    Node root;
    for (std::size_t r = 0; r < n; ++r) {
      auto plan = search(ctx[r], starts[r], {}, w);
      if (!plan) return fail;
      root.paths.push_back(std::move(plan->path));
      root.costs.push_back(plan->cost);
      root.cost += plan->cost;
    }
    root.conflicts = detect_conflicts(root.paths, radii);
    nodes.push_back(std::move(root));
    open.push(0);
  }

  std::size_t expansions = 0;
  while (!open.empty()) {
    const std::size_t id = open.top();
    open.pop();
    if (nodes[id].conflicts.empty()) {
      WindowPlan out;
      out.ok = true;
      out.paths = nodes[id].paths;
      out.cost = nodes[id].cost;
      out.expansions = expansions;
      return out;
    }
    if (++expansions > node_budget) break;

    const Conflict c = nodes[id].conflicts.front();
    for (std::size_t side = 0; side < 2; ++side) {
      const std::size_t r = side == 0 ? c.robot_a : c.robot_b;
      const Path& own = nodes[id].paths[r];
      Constraint added;
      added.robot = r;
      added.timestep = c.timestep;
      added.from = cell_at(own, c.timestep);
      if (c.kind == ConflictKind::tunnel) {
        added.edge = true;
        added.to = cell_at(own, c.timestep + 1);
      } else {
        added.to = added.from;
      }

      Node child;
      child.constraints = nodes[id].constraints;
      child.constraints.push_back(added);
      std::vector<Constraint> mine;
      for (const auto& k : child.constraints)
        if (k.robot == r) mine.push_back(k);
      auto plan = search(ctx[r], starts[r], mine, w);
      if (!plan) continue;
      child.paths = nodes[id].paths;
      child.costs = nodes[id].costs;
      child.cost = nodes[id].cost - child.costs[r] + plan->cost;
      child.paths[r] = std::move(plan->path);
      child.costs[r] = plan->cost;
      child.conflicts = detect_conflicts(child.paths, radii);
      nodes.push_back(std::move(child));
      open.push(nodes.size() - 1);
    }
  }
  fail.expansions = expansions;
  return fail;
}

std::vector<std::size_t> detect_deadlock(std::span<const RobotProgress> progress,
                                         double progress_epsilon) {
  double total = 0.0;
  std::vector<std::size_t> busy;
  for (std::size_t r = 0; r < progress.size(); ++r) {
    if (!progress[r].has_tasks) continue;
    busy.push_back(r);
    total += progress[r].start_distance - progress[r].end_distance;
  }
  if (busy.empty() || total >= progress_epsilon) return {};
  return busy;
}

}  // namespace taskplan
