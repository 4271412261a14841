#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskplan/assignment.hpp"
#include "taskplan/env.hpp"
#include "taskplan/grid.hpp"
#include "taskplan/mapf.hpp"
#include "taskplan/path.hpp"

namespace taskplan {

enum class MethodKind { tsotan, greedy, complete };

MethodKind parse_method(std::string_view name);
std::string to_string(MethodKind method);

struct MissionConfig {
  double gamma = 1.5;
  double mu = 1.05;
  double gap_threshold = 0.0;  // <= 0: derived from omega and mu
  PlanWindow window;
  double progress_epsilon = 0.5;
  double generation_probability = 0.25;
  std::size_t node_budget = kDefaultNodeBudget;
  std::uint64_t task_seed = 0;
  double cutoff_s = 600.0;  // solver + planner seconds after the initial solve
  int max_timesteps = 100'000;

  void validate() const;
};

/// A task that appears at a fixed time and place instead of being sampled.
struct ScriptedTask {
  int time = 0;
  Cell location;
};

enum class Decision { init, none, accept, full_reassign, complete, greedy };

std::string to_string(Decision decision);

/// One record per window boundary.
struct RunLogRecord {
  int clock = 0;
  double omega = 0.0;  // tracked lower bound after the decision
  std::size_t n_incomplete = 0;
  std::size_t n_unassigned = 0;  // before reassignment
  Decision decision = Decision::none;
  double makespan = 0.0;  // remaining makespan of the assignment after the decision
  std::optional<double> partial_makespan;
  std::optional<double> gate_omega;  // tracked bound the gate compared against
  std::optional<double> search_lower;
  std::optional<double> search_upper;
  int probes = 0;
  double wall_s = 0.0;
  bool plan_ok = true;
  std::size_t tasks_generated = 0;
  std::size_t tasks_completed = 0;
  std::vector<std::size_t> deadlocked;
  std::vector<Cell> broadcast;
};

struct MissionMetrics {
  int makespan = 0;  // time of the last completion
  double runtime_after_initial = 0.0;
  double solver_s = 0.0;
  double planner_s = 0.0;
  bool timed_out = false;
  std::size_t n_partial = 0;
  std::size_t n_complete = 0;
  std::size_t tasks_completed = 0;
  std::size_t tasks_total = 0;
};

struct MissionState {
  std::shared_ptr<const GridMap> map;
  std::vector<RobotProfile> robots;
  MissionConfig config;
  MethodKind method = MethodKind::tsotan;

  int clock = 0;
  std::vector<Task> tasks;            // every task so far, indexed by id
  std::vector<TaskId> incomplete;     // sorted
  std::vector<TaskId> unassigned;     // sorted, subset of incomplete
  Assignment assignment;              // task ids per robot
  BoundState bounds;
  std::vector<Path> committed;        // one entry per timestep from 0
  std::vector<Cell> positions;
  std::vector<Cell> broadcast;        // positions blocked for the next replan and window

  std::size_t queued_remaining = 0;
  std::vector<ScriptedTask> scripted;  // sorted by time, not yet released
  std::mt19937_64 rng;

  MissionMetrics metrics;
  int last_completion = 0;
  std::vector<std::shared_ptr<DistanceCache>> caches;  // per robot, shared by equal graphs

  bool complete() const;
};

/// Solves the initial assignment over `initial_tasks` (ids are reassigned
/// in order). Throws InfeasibleTaskError when a task is unreachable.
MissionState initialize(std::shared_ptr<const GridMap> map, std::vector<RobotProfile> robots,
                        std::span<const Cell> initial_tasks, const MissionConfig& config,
                        MethodKind method = MethodKind::tsotan, std::size_t queued = 0,
                        std::vector<ScriptedTask> scripted = {});

/// Samples tasks for timesteps (from, to]. Each step releases one queued
/// task with the configured probability at a uniformly random open cell
/// that some robot can reach and that holds no robot and no incomplete
/// task. New tasks are registered in `state.tasks` but not ingested.
std::vector<Task> generate_tasks(MissionState& state, int from, int to);

/// Adds tasks to the incomplete and unassigned sets.
void ingest(MissionState& state, std::span<const Task> tasks);

/// Runs the method's reassignment over the unassigned set at the current
/// positions and fills the decision fields of `record`.
void replan(MissionState& state, RunLogRecord& record);

/// Plans one window, commits the execution prefix, updates the tracked
/// bound, ingests new tasks, handles deadlock and replans.
RunLogRecord step_window(MissionState& state);

/// Appends `task` to the robot whose resulting makespan is smallest.
Assignment greedy_assign(const MissionState& state, const Task& task);

/// Remaining makespan of the current assignment from current positions.
double current_makespan(MissionState& state);

struct MissionRun {
  MissionMetrics metrics;
  std::vector<RunLogRecord> log;
  std::vector<Path> trajectories;
};

/// Steps `state` until done or the cutoff/timestep guard trips.
MissionRun run_mission(MissionState state, std::vector<RunLogRecord> log = {});

MissionRun run_mission(std::shared_ptr<const GridMap> map, std::vector<RobotProfile> robots,
                       std::span<const Cell> initial_tasks, std::size_t queued,
                       MethodKind method, const MissionConfig& config,
                       std::vector<ScriptedTask> scripted = {});

}  // namespace taskplan
