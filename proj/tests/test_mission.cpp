#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "taskplan/errors.hpp"
#include "taskplan/mission.hpp"

using namespace taskplan;

namespace {

std::vector<RobotProfile> robots_at(std::initializer_list<Cell> starts) {
  std::vector<RobotProfile> out;
  for (Cell c : starts) out.push_back(RobotProfile{out.size(), c, 1.0, 0.5, nullptr});
  return out;
}

MissionConfig small_window() {
  MissionConfig c;
  c.window = {4, 2};
  return c;
}

Task add_task(MissionState& s, Cell at) {
  Task t{s.tasks.size(), at, s.clock};
  s.tasks.push_back(t);
  return t;
}

// Open 4x4 grid, two robots, two initial tasks.
MissionState gate_example_state() {
  std::vector<Cell> tasks{{0, 1}, {0, 3}};
  return initialize(std::make_shared<const GridMap>(4, 4), robots_at({{3, 3}, {3, 1}}), tasks,
                    small_window());
}

// Every incomplete task outside the unassigned set is held exactly once.
void expect_consistent(const MissionState& s) {
  std::multiset<TaskId> held;
  for (const auto& seq : s.assignment.sequences) held.insert(seq.begin(), seq.end());
  for (TaskId id : s.unassigned)
    EXPECT_TRUE(std::binary_search(s.incomplete.begin(), s.incomplete.end(), id));
  for (TaskId id : s.incomplete) {
    const bool free = std::binary_search(s.unassigned.begin(), s.unassigned.end(), id);
    EXPECT_EQ(held.count(id), free ? 0u : 1u) << "task " << id;
  }
  EXPECT_EQ(held.size() + s.unassigned.size(), s.incomplete.size());
}

}  // namespace

TEST(Mission, EmptyInitializeHasZeroBound) {
  std::vector<Cell> none;
  auto s = initialize(std::make_shared<const GridMap>(5, 5), robots_at({{0, 0}}), none,
                      small_window());
  EXPECT_DOUBLE_EQ(s.bounds.tracked_lower, 0.0);
  EXPECT_TRUE(s.complete());
  auto run = run_mission(s);
  ASSERT_EQ(run.log.size(), 1u);
  EXPECT_EQ(run.log[0].decision, Decision::init);
  EXPECT_EQ(run.metrics.makespan, 0);
}

TEST(Mission, GateExampleInitialState) {
  auto s = gate_example_state();
  EXPECT_DOUBLE_EQ(s.bounds.tracked_lower, 3.0);
  EXPECT_EQ(s.assignment.sequences, (std::vector<std::vector<std::size_t>>{{1}, {0}}));
  EXPECT_DOUBLE_EQ(current_makespan(s), 3.0);
}

TEST(Mission, GateExamplePartialAccepted) {
  auto s = gate_example_state();
  std::vector<Task> fresh{add_task(s, {1, 3})};
  ingest(s, fresh);
  RunLogRecord rec;
  replan(s, rec);
  EXPECT_EQ(rec.decision, Decision::accept);
  EXPECT_DOUBLE_EQ(*rec.partial_makespan, 3.0);
  EXPECT_EQ(s.assignment.sequences, (std::vector<std::vector<std::size_t>>{{2, 1}, {0}}));
  EXPECT_DOUBLE_EQ(s.bounds.tracked_lower, 3.0);
  EXPECT_EQ(s.metrics.n_partial, 1u);
  EXPECT_EQ(s.metrics.n_complete, 0u);
  expect_consistent(s);
}

TEST(Mission, GateExampleFullReassignResetsBound) {
  auto s = gate_example_state();
  std::vector<Task> fresh{add_task(s, {2, 0})};
  ingest(s, fresh);
  RunLogRecord rec;
  replan(s, rec);
  EXPECT_EQ(rec.decision, Decision::full_reassign);
  EXPECT_DOUBLE_EQ(*rec.partial_makespan, 5.0);
  EXPECT_DOUBLE_EQ(*rec.search_lower, 3.0);
  EXPECT_DOUBLE_EQ(*rec.search_upper, 5.0);
  EXPECT_DOUBLE_EQ(s.bounds.tracked_lower, 5.0);
  EXPECT_DOUBLE_EQ(current_makespan(s), 5.0);
  EXPECT_EQ(s.assignment.sequences, (std::vector<std::vector<std::size_t>>{{1, 0}, {2}}));
  EXPECT_EQ(s.metrics.n_complete, 1u);
  expect_consistent(s);
}

TEST(Mission, NoNewTasksOnlyCommitsAndDecrements) {
  auto s = gate_example_state();
  const Assignment before = s.assignment;
  auto rec = step_window(s);
  EXPECT_EQ(rec.decision, Decision::none);
  EXPECT_EQ(s.clock, 2);
  EXPECT_DOUBLE_EQ(s.bounds.tracked_lower, 1.0);
  EXPECT_EQ(s.assignment, before);
  EXPECT_EQ(s.committed[0].size(), 3u);
  EXPECT_DOUBLE_EQ(rec.makespan, current_makespan(s));
}

TEST(Mission, GenerateWithEmptyQueue) {
  auto s = gate_example_state();
  EXPECT_TRUE(generate_tasks(s, 0, 10).empty());
}

TEST(Mission, GenerateRespectsBudgetAndCells) {
  std::vector<Cell> tasks{{4, 4}};
  auto cfg = small_window();
  cfg.generation_probability = 1.0;
  cfg.task_seed = 5;
  auto s = initialize(std::make_shared<const GridMap>(6, 6), robots_at({{0, 0}, {5, 5}}), tasks,
                      cfg, MethodKind::tsotan, 3);
  auto out = generate_tasks(s, 0, 5);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(s.queued_remaining, 0u);
  std::set<std::pair<int, int>> cells;
  for (std::size_t k = 0; k < out.size(); ++k) {
    EXPECT_EQ(out[k].created_at, static_cast<int>(k) + 1);
    EXPECT_EQ(out[k].id, k + 1);
    EXPECT_NE(out[k].location, (Cell{4, 4}));
    EXPECT_NE(out[k].location, (Cell{0, 0}));
    EXPECT_NE(out[k].location, (Cell{5, 5}));
    cells.insert({out[k].location.x, out[k].location.y});
  }
  EXPECT_EQ(cells.size(), 3u);
  EXPECT_TRUE(generate_tasks(s, 5, 10).empty());
}

TEST(Mission, GenerateIsDeterministic) {
  std::vector<Cell> tasks{{4, 4}};
  auto cfg = small_window();
  cfg.task_seed = 77;
  auto map = std::make_shared<const GridMap>(generate_map(MapKind::random, 12, 12, 0.2, 3));
  auto a = initialize(map, robots_at({map->open_cells().front()}), tasks, cfg,
                      MethodKind::tsotan, 6);
  auto b = a;
  EXPECT_EQ(generate_tasks(a, 0, 20), generate_tasks(b, 0, 20));
}

TEST(Mission, GreedyPicksNearerIdleRobot) {
  std::vector<Cell> none;
  auto s = initialize(std::make_shared<const GridMap>(12, 1), robots_at({{0, 0}, {11, 0}}), none,
                      small_window(), MethodKind::greedy);
  Task t = add_task(s, {4, 0});  // 4 vs 7 hops
  auto a = greedy_assign(s, t);
  EXPECT_EQ(a.sequences, (std::vector<std::vector<std::size_t>>{{0}, {}}));
}

TEST(Mission, GreedyAvoidsBusyRobot) {
  std::vector<Cell> none;
  auto s = initialize(std::make_shared<const GridMap>(12, 1), robots_at({{3, 0}, {11, 0}}), none,
                      small_window(), MethodKind::greedy);
  Task far = add_task(s, {0, 0});
  s.assignment.sequences[0] = {far.id};
  Task t = add_task(s, {6, 0});  // robot 0: 3 + 6 = 9, robot 1: 5
  auto a = greedy_assign(s, t);
  EXPECT_EQ(a.sequences[1], (std::vector<std::size_t>{t.id}));
}

TEST(Mission, GreedyTiesGoToLowestIndex) {
  std::vector<Cell> none;
  auto s = initialize(std::make_shared<const GridMap>(9, 1), robots_at({{0, 0}, {8, 0}}), none,
                      small_window(), MethodKind::greedy);
  Task t = add_task(s, {4, 0});
  EXPECT_EQ(greedy_assign(s, t).sequences[0], (std::vector<std::size_t>{t.id}));
}

TEST(Mission, SingleAdjacentTask) {
  std::vector<Cell> tasks{{1, 0}};
  auto run = run_mission(std::make_shared<const GridMap>(3, 3), robots_at({{0, 0}}), tasks, 0,
                         MethodKind::tsotan, small_window());
  EXPECT_EQ(run.metrics.makespan, 1);
  EXPECT_FALSE(run.metrics.timed_out);
  EXPECT_EQ(run.metrics.n_partial, 0u);
  EXPECT_EQ(run.metrics.n_complete, 0u);
  EXPECT_EQ(run.metrics.tasks_completed, 1u);
  EXPECT_EQ(run.metrics.tasks_total, 1u);
}

TEST(Mission, UnreachableInitialTaskThrows) {
  GridMap m(5, 1);
  m.set_obstacle({2, 0}, true);
  std::vector<Cell> tasks{{4, 0}};
  EXPECT_THROW(initialize(std::make_shared<const GridMap>(m), robots_at({{0, 0}}), tasks,
                          small_window()),
               InfeasibleTaskError);
}

TEST(Mission, InvalidConfigRejected) {
  MissionConfig c;
  c.gamma = 0.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.window = {2, 3};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(parse_method("other"), std::invalid_argument);
}

TEST(Mission, ScriptedTasksReleaseOnSchedule) {
  std::vector<Cell> tasks{{0, 1}, {0, 3}};
  auto run = run_mission(std::make_shared<const GridMap>(4, 4), robots_at({{3, 3}, {3, 1}}),
                         tasks, 0, MethodKind::tsotan, small_window(),
                         {{0, {1, 3}}, {2, {2, 0}}});
  ASSERT_GE(run.log.size(), 3u);
  EXPECT_EQ(run.log[1].clock, 0);
  EXPECT_EQ(run.log[1].decision, Decision::accept);
  EXPECT_EQ(run.log[2].clock, 2);
  EXPECT_EQ(run.log[2].decision, Decision::full_reassign);
  EXPECT_EQ(run.metrics.tasks_completed, 4u);
  EXPECT_EQ(run.metrics.tasks_total, 4u);
}

// Steps random missions by hand and checks the loop's bookkeeping after
// every window.
TEST(Mission, RandomMissionInvariants) {
  for (int method = 0; method < 3; ++method)
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      auto map = std::make_shared<const GridMap>(generate_map(MapKind::random, 15, 15, 0.2, seed));
      std::mt19937_64 rng(seed);
      auto open = map->open_cells();
      std::shuffle(open.begin(), open.end(), rng);
      std::vector<Cell> tasks(open.begin() + 3, open.begin() + 8);
      auto cfg = small_window();
      cfg.task_seed = seed;
      auto s = initialize(map, robots_at({open[0], open[1], open[2]}), tasks, cfg,
                          static_cast<MethodKind>(method), 4);
      double omega = s.bounds.tracked_lower;
      std::size_t completed = 0;
      while (!s.complete()) {
        ASSERT_LT(s.clock, 500);
        auto rec = step_window(s);
        expect_consistent(s);
        EXPECT_TRUE(s.unassigned.empty());
        EXPECT_DOUBLE_EQ(rec.makespan, current_makespan(s));
        completed += rec.tasks_completed;
        if (rec.decision == Decision::accept)
          EXPECT_LE(*rec.partial_makespan, s.config.gamma * *rec.gate_omega + 1e-9);
        if (rec.decision == Decision::full_reassign)
          EXPECT_GT(*rec.partial_makespan, s.config.gamma * *rec.gate_omega);
        if (rec.decision == Decision::none || rec.decision == Decision::accept ||
            rec.decision == Decision::greedy)
          EXPECT_LE(rec.omega, omega);
        omega = rec.omega;
      }
      EXPECT_EQ(completed, s.tasks.size());
      for (std::size_t r = 0; r < s.robots.size(); ++r)
        EXPECT_EQ(s.committed[r].size(), static_cast<std::size_t>(s.clock) + 1);
    }
}

TEST(Mission, DeadlockedCorridorRecovers) {
  GridMap m(16, 3);
  for (int x = 3; x < 13; ++x) {
    m.set_obstacle({x, 0}, true);
    m.set_obstacle({x, 2}, true);
  }
  std::vector<Cell> tasks{{15, 0}, {0, 2}};
  auto s = initialize(std::make_shared<const GridMap>(m), robots_at({{1, 1}, {14, 1}}), tasks,
                      small_window());
  s.assignment.sequences = {{0}, {1}};  // both robots must cross the corridor
  auto run = run_mission(s);
  EXPECT_FALSE(run.metrics.timed_out);
  auto it = std::find_if(run.log.begin(), run.log.end(),
                         [](const RunLogRecord& r) { return !r.deadlocked.empty(); });
  ASSERT_NE(it, run.log.end());
  EXPECT_EQ(it->deadlocked, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(it->broadcast.size(), 2u);
  EXPECT_EQ(it->n_unassigned, 2u);
}
