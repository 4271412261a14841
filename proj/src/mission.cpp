#include "taskplan/mission.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <string>

#include "taskplan/errors.hpp"

namespace taskplan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Robot profiles and distance caches one replan works with. With broadcast
// positions in effect every robot gets its own reduced graph.
struct Workspace {
  std::vector<RobotProfile> robots;
  std::vector<std::shared_ptr<DistanceCache>> caches;
  bool blocked = false;
};

Workspace plain_workspace(const MissionState& s) { return {s.robots, s.caches, false}; }

Workspace blocked_workspace(const MissionState& s) {
  if (s.broadcast.empty()) return plain_workspace(s);
  Workspace ws;
  ws.blocked = true;
  for (std::size_t r = 0; r < s.robots.size(); ++r) {
    RobotProfile p = s.robots[r];
    std::vector<Cell> cells = p.graph->blocked_cells();
    cells.insert(cells.end(), s.broadcast.begin(), s.broadcast.end());
    std::erase(cells, s.positions[r]);
    p.graph = std::make_shared<const GridGraph>(p.graph->map_ptr(), cells);
    ws.caches.push_back(std::make_shared<DistanceCache>(p.graph));
    ws.robots.push_back(std::move(p));
  }
  return ws;
}

std::vector<Cell> locations(const MissionState& s, std::span<const TaskId> ids) {
  std::vector<Cell> out;
  out.reserve(ids.size());
  for (TaskId id : ids) out.push_back(s.tasks[id].location);
  return out;
}

double chain_cost(const MissionState& s, const RobotProfile& robot, DistanceCache& cache,
                  Cell from, std::span<const TaskId> seq) {
  double total = 0.0;
  Cell at = from;
  for (TaskId id : seq) {
    const int h = cache.hops(at, s.tasks[id].location);
    if (h < 0) return kInfeasibleCost;
    total += h / robot.speed;
    at = s.tasks[id].location;
  }
  return total;
}

std::vector<CostMatrix> plain_matrices(const MissionState& s, Workspace& ws,
                                       std::span<const TaskId> ids) {
  const auto locs = locations(s, ids);
  std::vector<CostMatrix> out;
  for (std::size_t r = 0; r < ws.robots.size(); ++r)
    out.push_back(build_cost_matrix(ws.robots[r], s.positions[r], locs, std::nullopt,
                                    *ws.caches[r]));
  return out;
}

BoundState search_bounds(const MissionState& s, double lo, double hi) {
  BoundState b = s.bounds;
  b.omega = lo;
  b.upper = hi;
  b.mu = s.config.mu;
  b.gap_threshold = s.config.gap_threshold;
  if (!(b.effective_gap() > 0.0)) b.gap_threshold = s.config.mu - 1.0;
  return b;
}

// Re-solves over every incomplete task from the current positions.
AssignmentOutcome reassign_all(MissionState& s, Workspace& ws, std::optional<double> upper,
                               RunLogRecord& rec) {
  const std::vector<TaskId> ids = s.incomplete;
  auto matrices = plain_matrices(s, ws, ids);
  auto [lo, hi] = default_bounds(matrices, ids.size());
  if (upper) hi = *upper;
  const double omega = s.bounds.tracked_lower;
  if (omega > 0.0 && omega <= hi) lo = omega;
  lo = std::min(lo, hi);
  rec.search_lower = lo;
  rec.search_upper = hi;

  AssignmentOutcome out = minmax_assign(matrices, search_bounds(s, lo, hi));
  Assignment mapped(s.robots.size());
  for (std::size_t r = 0; r < mapped.robots(); ++r)
    for (std::size_t slot : out.assignment.sequences[r]) mapped.sequences[r].push_back(ids[slot]);
  out.assignment = std::move(mapped);

  s.assignment = out.assignment;
  s.unassigned.clear();
  ++s.metrics.n_complete;
  // A bound proven on a graph with extra obstacles says nothing about the
  // unobstructed optimum.
  if (!ws.blocked) s.bounds.tracked_lower = out.lower_bound;
  rec.probes += out.iterations;
  return out;
}

void replan_tsotan(MissionState& s, Workspace& ws, RunLogRecord& rec) {
  const std::vector<TaskId> fresh = s.unassigned;
  const auto fresh_locs = locations(s, fresh);
  std::vector<CostMatrix> modified;
  for (std::size_t r = 0; r < s.robots.size(); ++r) {
    const auto& seq = s.assignment.sequences[r];
    std::optional<CarriedWork> carried;
    if (!seq.empty())
      carried = CarriedWork{s.tasks[seq.back()].location,
                            chain_cost(s, ws.robots[r], *ws.caches[r], s.positions[r], seq)};
    modified.push_back(build_cost_matrix(ws.robots[r], s.positions[r], fresh_locs, carried,
                                         *ws.caches[r]));
  }
  MatrixBuilder plain = [&](std::size_t r, std::span<const std::size_t> ids) {
    return build_cost_matrix(ws.robots[r], s.positions[r], locations(s, ids), std::nullopt,
                             *ws.caches[r]);
  };
  BoundState b = s.bounds;
  b.mu = s.config.mu;
  AssignmentOutcome partial = partial_reassign(s.assignment, fresh, modified, b, plain);
  rec.probes += partial.iterations;
  rec.partial_makespan = partial.makespan;
  rec.gate_omega = s.bounds.tracked_lower;

  if (check_bound(partial.makespan, s.bounds) == BoundDecision::accept) {
    s.assignment = std::move(partial.assignment);
    s.unassigned.clear();
    ++s.metrics.n_partial;
    rec.decision = Decision::accept;
    return;
  }
  reassign_all(s, ws, partial.makespan, rec);
  rec.decision = Decision::full_reassign;
}

void replan_complete(MissionState& s, Workspace& ws, RunLogRecord& rec) {
  reassign_all(s, ws, std::nullopt, rec);
  rec.decision = Decision::complete;
}

Assignment greedy_append(const MissionState& s, const Workspace& ws, const Assignment& current,
                         const Task& task) {
  const std::size_t n = s.robots.size();
  std::vector<double> load(n);
  for (std::size_t r = 0; r < n; ++r)
    load[r] = chain_cost(s, ws.robots[r], *ws.caches[r], s.positions[r], current.sequences[r]);

  std::optional<std::size_t> best;
  double best_j = kInfeasibleCost;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& seq = current.sequences[r];
    const Cell from = seq.empty() ? s.positions[r] : s.tasks[seq.back()].location;
    const int h = ws.caches[r]->hops(from, task.location);
    if (h < 0 || !std::isfinite(load[r])) continue;
    double j = load[r] + h / ws.robots[r].speed;
    for (std::size_t q = 0; q < n; ++q)
      if (q != r) j = std::max(j, load[q]);
    if (!best || j < best_j) {
      best = r;
      best_j = j;
    }
  }
  if (!best)
    throw InfeasibleTaskError(task.id, "task " + std::to_string(task.id) +
                                           " is unreachable by every robot");
  Assignment out = current;
  out.sequences[*best].push_back(task.id);
  return out;
}

void replan_greedy(MissionState& s, const Workspace& ws, RunLogRecord& rec) {
  Assignment next = s.assignment;
  for (TaskId id : s.unassigned) next = greedy_append(s, ws, next, s.tasks[id]);
  s.assignment = std::move(next);
  s.unassigned.clear();
  ++s.metrics.n_partial;
  rec.decision = Decision::greedy;
}

void complete_arrivals(MissionState& s, int time) {
  for (std::size_t r = 0; r < s.robots.size(); ++r) {
    auto& seq = s.assignment.sequences[r];
    while (!seq.empty() && s.tasks[seq.front()].location == s.positions[r]) {
      const TaskId done = seq.front();
      seq.erase(seq.begin());
      std::erase(s.incomplete, done);
      ++s.metrics.tasks_completed;
      s.last_completion = time;
    }
  }
}

void release_scripted(MissionState& s, std::vector<Task>& out) {
  while (!s.scripted.empty() && s.scripted.front().time <= s.clock) {
    Task t{s.tasks.size(), s.scripted.front().location, s.scripted.front().time};
    s.tasks.push_back(t);
    out.push_back(t);
    s.scripted.erase(s.scripted.begin());
  }
}

RunLogRecord init_record(MissionState& s) {
  RunLogRecord rec;
  rec.clock = s.clock;
  rec.decision = Decision::init;
  rec.omega = s.bounds.tracked_lower;
  rec.n_incomplete = s.incomplete.size();
  rec.makespan = current_makespan(s);
  rec.search_lower = s.bounds.omega;
  rec.search_upper = s.bounds.upper;
  return rec;
}

}  // namespace

MethodKind parse_method(std::string_view name) {
  if (name == "tsotan") return MethodKind::tsotan;
  if (name == "greedy") return MethodKind::greedy;
  if (name == "complete") return MethodKind::complete;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string to_string(MethodKind method) {
  switch (method) {
    case MethodKind::tsotan: return "tsotan";
    case MethodKind::greedy: return "greedy";
    case MethodKind::complete: return "complete";
  }
  return "?";
}

std::string to_string(Decision decision) {
  switch (decision) {
    case Decision::init: return "init";
    case Decision::none: return "none";
    case Decision::accept: return "accept";
    case Decision::full_reassign: return "full_reassign";
    case Decision::complete: return "complete";
    case Decision::greedy: return "greedy";
  }
  return "?";
}

void MissionConfig::validate() const {
  if (!(gamma >= 1.0)) throw std::invalid_argument("gamma must be >= 1");
  if (!(mu > 1.0)) throw std::invalid_argument("mu must be > 1");
  if (!window.valid()) throw std::invalid_argument("exec horizon must lie in [1, plan horizon]");
  if (!(progress_epsilon >= 0.0)) throw std::invalid_argument("progress_epsilon must be >= 0");
  if (!(generation_probability >= 0.0 && generation_probability <= 1.0))
    throw std::invalid_argument("generation probability must lie in [0, 1]");
  if (node_budget == 0) throw std::invalid_argument("node budget must be positive");
  if (!(cutoff_s > 0.0)) throw std::invalid_argument("cutoff must be positive");
  if (max_timesteps <= 0) throw std::invalid_argument("max_timesteps must be positive");
}

bool MissionState::complete() const {
  return incomplete.empty() && queued_remaining == 0 && scripted.empty();
}

MissionState initialize(std::shared_ptr<const GridMap> map, std::vector<RobotProfile> robots,
                        std::span<const Cell> initial_tasks, const MissionConfig& config,
                        MethodKind method, std::size_t queued,
                        std::vector<ScriptedTask> scripted) {
  config.validate();
  if (!map) throw ContractError("mission needs a map");
  if (robots.empty()) throw ContractError("mission needs at least one robot");

  MissionState s;
  s.map = map;
  s.config = config;
  s.method = method;
  s.queued_remaining = queued;
  s.rng.seed(config.task_seed);
  std::stable_sort(scripted.begin(), scripted.end(),
                   [](const ScriptedTask& a, const ScriptedTask& b) { return a.time < b.time; });
  s.scripted = std::move(scripted);

  std::map<const GridGraph*, std::shared_ptr<DistanceCache>> by_graph;
  auto shared = std::make_shared<const GridGraph>(map);
  for (std::size_t r = 0; r < robots.size(); ++r) {
    auto& p = robots[r];
    p.id = r;
    if (!p.graph) p.graph = shared;
    if (!p.graph->contains(p.start))
      throw InvalidVertexError("robot " + std::to_string(r) + " starts off its graph");
    for (std::size_t q = 0; q < r; ++q)
      if (robots[q].start == p.start) throw ContractError("robots must start on distinct cells");
    auto& cache = by_graph[p.graph.get()];
    if (!cache) cache = std::make_shared<DistanceCache>(p.graph);
    s.caches.push_back(cache);
    s.positions.push_back(p.start);
    s.committed.push_back(Path{{{p.start, 0.0}}});
  }
  s.robots = std::move(robots);
  s.assignment = Assignment(s.robots.size());

  s.bounds.gamma = config.gamma;
  s.bounds.mu = config.mu;
  s.bounds.gap_threshold = config.gap_threshold;
  for (Cell c : initial_tasks) {
    if (!map->is_open(c)) throw InvalidVertexError("initial task on a blocked cell");
    s.tasks.push_back({s.tasks.size(), c, 0});
    s.incomplete.push_back(s.tasks.back().id);
  }
  if (!s.incomplete.empty()) {
    Workspace ws = plain_workspace(s);
    auto matrices = plain_matrices(s, ws, s.incomplete);
    auto [lo, hi] = default_bounds(matrices, s.incomplete.size());
    s.bounds.omega = lo;
    s.bounds.upper = hi;
    AssignmentOutcome out = minmax_assign(matrices, search_bounds(s, lo, hi));
    for (std::size_t r = 0; r < s.robots.size(); ++r)
      for (std::size_t slot : out.assignment.sequences[r])
        s.assignment.sequences[r].push_back(s.incomplete[slot]);
    s.bounds.tracked_lower = out.lower_bound;
  }
  return s;
}

std::vector<Task> generate_tasks(MissionState& s, int from, int to) {
  std::vector<Task> out;
  if (s.queued_remaining == 0 || to <= from) return out;
  std::bernoulli_distribution fire(s.config.generation_probability);
  std::vector<const std::vector<int>*> fields;
  for (std::size_t r = 0; r < s.robots.size(); ++r)
    fields.push_back(&s.caches[r]->field(s.positions[r]));

  for (int t = from + 1; t <= to && s.queued_remaining > 0; ++t) {
    if (!fire(s.rng)) continue;
    std::vector<Cell> candidates;
    for (Cell c : s.map->open_cells()) {
      if (std::find(s.positions.begin(), s.positions.end(), c) != s.positions.end()) continue;
      bool taken = false;
      for (TaskId id : s.incomplete) taken = taken || s.tasks[id].location == c;
      for (const Task& n : out) taken = taken || n.location == c;
      if (taken) continue;
      bool reachable = false;
      for (std::size_t r = 0; r < s.robots.size() && !reachable; ++r)
        reachable = s.robots[r].graph->contains(c) &&
                    (*fields[r])[static_cast<std::size_t>(s.map->index(c))] >= 0;
      if (reachable) candidates.push_back(c);
    }
    if (candidates.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    Task task{s.tasks.size(), candidates[pick(s.rng)], t};
    s.tasks.push_back(task);
    out.push_back(task);
    --s.queued_remaining;
  }
  return out;
}

void ingest(MissionState& s, std::span<const Task> tasks) {
  for (const Task& t : tasks) {
    if (t.id >= s.tasks.size() || !(s.tasks[t.id] == t))
      throw ContractError("ingested tasks must be registered first");
    s.incomplete.push_back(t.id);
    s.unassigned.push_back(t.id);
  }
  std::sort(s.incomplete.begin(), s.incomplete.end());
  std::sort(s.unassigned.begin(), s.unassigned.end());
}

void replan(MissionState& s, RunLogRecord& rec) {
  rec.n_unassigned = s.unassigned.size();
  if (s.unassigned.empty()) {
    rec.decision = Decision::none;
    return;
  }
  const auto t0 = Clock::now();
  auto dispatch = [&](Workspace& ws) {
    switch (s.method) {
      case MethodKind::greedy: replan_greedy(s, ws, rec); break;
      case MethodKind::complete: replan_complete(s, ws, rec); break;
      case MethodKind::tsotan: replan_tsotan(s, ws, rec); break;
    }
  };
  Workspace ws = blocked_workspace(s);
  try {
    dispatch(ws);
  } catch (const InfeasibleTaskError&) {
    if (!ws.blocked) throw;
    // The broadcast cut some task off from every robot; plan without it.
    s.broadcast.clear();
    ws = plain_workspace(s);
    dispatch(ws);
  }
  const double dt = seconds_since(t0);
  s.metrics.solver_s += dt;
  rec.wall_s += dt;
}

RunLogRecord step_window(MissionState& s) {
  if (s.complete()) throw ContractError("mission is already complete");
  RunLogRecord rec;
  const auto before_completed = s.metrics.tasks_completed;
  complete_arrivals(s, s.clock);

  const int te = s.config.window.exec_horizon;
  std::vector<std::vector<Cell>> goals;
  for (const auto& seq : s.assignment.sequences) goals.push_back(locations(s, seq));

  const auto t0 = Clock::now();
  WindowPlan plan = plan_window(s.robots, s.positions, goals, s.config.window, s.broadcast,
                                s.config.node_budget);
  const double dt = seconds_since(t0);
  s.metrics.planner_s += dt;
  rec.wall_s += dt;
  rec.plan_ok = plan.ok;

  const Assignment start_assignment = s.assignment;
  const std::vector<Cell> start_positions = s.positions;
  for (int t = 1; t <= te; ++t) {
    for (std::size_t r = 0; r < s.robots.size(); ++r) {
      s.positions[r] = cell_at(plan.paths[r], t);
      s.committed[r].entries.push_back({s.positions[r], static_cast<double>(s.clock + t)});
    }
    complete_arrivals(s, s.clock + t);
  }
  s.clock += te;
  s.broadcast.clear();
  s.bounds = update_tracked_lower(s.bounds, te);

  std::vector<Task> fresh = generate_tasks(s, s.clock - te, s.clock);
  release_scripted(s, fresh);
  ingest(s, fresh);
  rec.tasks_generated = fresh.size();

  std::vector<RobotProgress> progress(s.robots.size());
  for (std::size_t r = 0; r < s.robots.size(); ++r) {
    const auto& seq = start_assignment.sequences[r];
    if (seq.empty()) continue;
    progress[r].has_tasks = true;
    progress[r].start_distance =
        chain_cost(s, s.robots[r], *s.caches[r], start_positions[r], seq);
    progress[r].end_distance =
        chain_cost(s, s.robots[r], *s.caches[r], s.positions[r], s.assignment.sequences[r]);
  }
  rec.deadlocked = detect_deadlock(progress, s.config.progress_epsilon);
  for (std::size_t r : rec.deadlocked) {
    auto& seq = s.assignment.sequences[r];
    s.unassigned.insert(s.unassigned.end(), seq.begin(), seq.end());
    seq.clear();
    s.broadcast.push_back(s.positions[r]);
  }
  std::sort(s.unassigned.begin(), s.unassigned.end());
  rec.broadcast = s.broadcast;

  rec.clock = s.clock;
  rec.n_incomplete = s.incomplete.size();
  replan(s, rec);
  rec.omega = s.bounds.tracked_lower;
  rec.makespan = current_makespan(s);
  rec.tasks_completed = s.metrics.tasks_completed - before_completed;
  return rec;
}

Assignment greedy_assign(const MissionState& s, const Task& task) {
  return greedy_append(s, plain_workspace(s), s.assignment, task);
}

double current_makespan(MissionState& s) {
  double j = 0.0;
  for (std::size_t r = 0; r < s.robots.size(); ++r)
    j = std::max(j, chain_cost(s, s.robots[r], *s.caches[r], s.positions[r],
                               s.assignment.sequences[r]));
  return j;
}

MissionRun run_mission(MissionState s, std::vector<RunLogRecord> log) {
  if (log.empty()) log.push_back(init_record(s));
  if (!s.scripted.empty() && s.scripted.front().time <= s.clock) {
    std::vector<Task> fresh;
    release_scripted(s, fresh);
    ingest(s, fresh);
    RunLogRecord rec;
    rec.clock = s.clock;
    rec.tasks_generated = fresh.size();
    rec.n_incomplete = s.incomplete.size();
    replan(s, rec);
    rec.omega = s.bounds.tracked_lower;
    rec.makespan = current_makespan(s);
    log.push_back(rec);
  }
  while (!s.complete()) {
    if (s.metrics.solver_s + s.metrics.planner_s > s.config.cutoff_s ||
        s.clock >= s.config.max_timesteps) {
      s.metrics.timed_out = true;
      break;
    }
    log.push_back(step_window(s));
  }

  MissionRun run;
  run.metrics = s.metrics;
  run.metrics.makespan = run.metrics.timed_out ? s.clock : s.last_completion;
  run.metrics.runtime_after_initial = s.metrics.solver_s + s.metrics.planner_s;
  run.metrics.tasks_total = s.tasks.size() + s.queued_remaining + s.scripted.size();
  run.log = std::move(log);
  run.trajectories = std::move(s.committed);
  return run;
}

MissionRun run_mission(std::shared_ptr<const GridMap> map, std::vector<RobotProfile> robots,
                       std::span<const Cell> initial_tasks, std::size_t queued,
                       MethodKind method, const MissionConfig& config,
                       std::vector<ScriptedTask> scripted) {
  return run_mission(initialize(std::move(map), std::move(robots), initial_tasks, config, method,
                                queued, std::move(scripted)));
}

}  // namespace taskplan
