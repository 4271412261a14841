#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "taskplan/grid.hpp"
#include "taskplan/mission.hpp"

namespace taskplan {

struct ScenarioConfig {
  std::string scenario_id = "scenario";

  // Map: loaded from `map` when set, otherwise generated.
  std::string map;
  MapKind map_kind = MapKind::random;
  int width = 32;
  int height = 32;
  double density = 0.2;

  std::size_t robots = 6;
  std::vector<Cell> starts;  // empty: seeded random
  double collision_radius = 0.5;

  std::size_t initial_tasks = 10;
  std::vector<Cell> tasks;  // explicit initial tasks; overrides initial_tasks
  std::size_t queued_tasks = 10;
  std::vector<ScriptedTask> scripted_tasks;
  // Per robot, indices into `tasks` to hold at start instead of solving.
  std::vector<std::vector<std::size_t>> initial_assignment;
  double generation_probability = 0.25;

  double gamma = 1.5;
  double mu = 1.05;
  double gap_threshold = 0.0;
  int plan_horizon = 10;
  int exec_horizon = 5;
  double progress_epsilon = 0.5;
  std::size_t node_budget = kDefaultNodeBudget;

  MethodKind method = MethodKind::tsotan;
  std::uint64_t seed = 1;
  double cutoff = 600.0;
  int max_timesteps = 100'000;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

ScenarioConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioConfig& config);
ScenarioConfig load_config_file(const std::string& path);

/// Independent seeds for map generation, robot starts, initial tasks and
/// online task generation.
struct SeedSet {
  std::uint64_t map;
  std::uint64_t starts;
  std::uint64_t tasks;
  std::uint64_t generation;
};
SeedSet derive_seeds(std::uint64_t base);

struct Instance {
  std::shared_ptr<const GridMap> map;
  std::vector<RobotProfile> robots;
  std::vector<Cell> initial_tasks;
  std::vector<ScriptedTask> scripted;
  std::optional<Assignment> pinned;  // task ids per robot
  MissionConfig mission;
};

/// Materialises the map, robots and tasks for one seed.
Instance build_instance(const ScenarioConfig& config, std::uint64_t seed);

struct ResultRow {
  std::string scenario_id;
  std::string method;
  std::uint64_t seed = 0;
  int makespan = 0;  // -1 when the run failed
  double runtime_s = 0.0;
  bool timed_out = false;
  std::size_t n_partial = 0;
  std::size_t n_complete = 0;
  std::size_t tasks_total = 0;
  double solver_s = 0.0;  // not part of the CSV
  std::string error;      // not part of the CSV
};

std::string csv_header();
std::string to_csv(const ResultRow& row);

/// Runs one mission. Failures after startup are reported in the row.
ResultRow run_single(const ScenarioConfig& config, std::uint64_t seed,
                     MissionRun* run_out = nullptr);

/// One run per repetition with seeds seed, seed + 1, ... Up to `jobs` runs
/// execute concurrently; `on_row` sees rows in repetition order as soon as
/// each is available. When `runlog_dir` is set every run writes its log
/// there.
std::vector<ResultRow> run_batch(const ScenarioConfig& config, std::size_t repetitions,
                                 std::size_t jobs = 1,
                                 const std::function<void(const ResultRow&)>& on_row = {},
                                 const std::optional<std::string>& runlog_dir = std::nullopt);

inline constexpr int kRunLogSchemaVersion = 1;

nlohmann::json to_json(const RunLogRecord& record);
nlohmann::json paths_to_json(std::span<const Path> paths);

/// Newline-delimited JSON: one "window" record per log entry, then one
/// "trajectories" record. Throws std::runtime_error when `path` cannot be
/// written.
void emit_runlog(const MissionRun& run, const std::string& path);
void write_runlog(const MissionRun& run, std::ostream& out);

std::string runlog_name(const ScenarioConfig& config, std::uint64_t seed);

}  // namespace taskplan
