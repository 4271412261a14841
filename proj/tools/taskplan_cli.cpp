// taskplan: batch mission runner and map generator.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "taskplan/errors.hpp"
#include "taskplan/grid.hpp"
#include "taskplan/scenario.hpp"

using nlohmann::json;

namespace {

std::vector<int> split_ints(const std::string& text, std::optional<std::size_t> expected) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) out.push_back(std::stoi(part));
  if (expected && out.size() != *expected)
    throw std::invalid_argument("expected " + std::to_string(*expected) +
                                " comma-separated integers, got '" + text + "'");
  return out;
}

// Scalar overrides keyed by config field name.
struct Overrides {
  std::optional<std::string> scenario_id, map, map_kind, method;
  std::optional<int> width, height, plan_horizon, exec_horizon, max_timesteps;
  std::optional<double> density, collision_radius, generation_probability, gamma, mu,
      gap_threshold, progress_epsilon, cutoff;
  std::optional<std::size_t> robots, initial_tasks, queued_tasks, node_budget;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> starts, tasks, scripted_tasks, initial_assignment;

  void add_to(CLI::App& app) {
    app.add_option("--scenario_id", scenario_id, "Scenario label written to every row");
    app.add_option("--map", map, "Octile map file (otherwise a map is generated)");
    app.add_option("--map_kind", map_kind, "Generated map kind: office|forest|random");
    app.add_option("--width", width, "Generated map width");
    app.add_option("--height", height, "Generated map height");
    app.add_option("--density", density, "Generated map obstacle density");
    app.add_option("--robots", robots, "Robot count");
    app.add_option("--starts", starts, "Explicit robot starts as x,y")->expected(1, -1);
    app.add_option("--collision_radius", collision_radius, "Robot collision radius (cells)");
    app.add_option("--initial_tasks", initial_tasks, "Random initial task count");
    app.add_option("--tasks", tasks, "Explicit initial tasks as x,y")->expected(1, -1);
    app.add_option("--queued_tasks", queued_tasks, "Online task budget");
    app.add_option("--scripted_tasks", scripted_tasks, "Scripted tasks as t,x,y")
        ->expected(1, -1);
    app.add_option("--initial_assignment", initial_assignment,
                   "Pinned start assignment: one comma-separated task index list per robot, "
                   "'-' for none")
        ->expected(1, -1);
    app.add_option("--generation_probability", generation_probability,
                   "Per-timestep task generation probability");
    app.add_option("--gamma", gamma, "Partial-solution acceptance factor (>= 1)");
    app.add_option("--mu", mu, "Bisection tolerance factor (> 1)");
    app.add_option("--gap_threshold", gap_threshold, "Explicit bisection gap (0: derived)");
    app.add_option("--plan_horizon", plan_horizon, "Planning window w");
    app.add_option("--exec_horizon", exec_horizon, "Executed steps per window");
    app.add_option("--progress_epsilon", progress_epsilon, "Deadlock progress threshold");
    app.add_option("--node_budget", node_budget, "Conflict search node budget per window");
    app.add_option("--method", method, "tsotan|greedy|complete");
    app.add_option("--seed", seed, "Base seed; repetition i uses seed + i");
    app.add_option("--cutoff", cutoff, "Per-run computation cutoff in seconds");
    app.add_option("--max_timesteps", max_timesteps, "Per-run simulated time guard");
  }

  void apply(json& doc) const {
    auto set = [&doc](const char* key, const auto& v) {
      if (v) doc[key] = *v;
    };
    set("scenario_id", scenario_id);
    set("map", map);
    set("map_kind", map_kind);
    set("method", method);
    set("width", width);
    set("height", height);
    set("plan_horizon", plan_horizon);
    set("exec_horizon", exec_horizon);
    set("max_timesteps", max_timesteps);
    set("density", density);
    set("collision_radius", collision_radius);
    set("generation_probability", generation_probability);
    set("gamma", gamma);
    set("mu", mu);
    set("gap_threshold", gap_threshold);
    set("progress_epsilon", progress_epsilon);
    set("cutoff", cutoff);
    set("robots", robots);
    set("initial_tasks", initial_tasks);
    set("queued_tasks", queued_tasks);
    set("node_budget", node_budget);
    set("seed", seed);
    if (!starts.empty()) {
      doc["starts"] = json::array();
      for (const auto& s : starts) doc["starts"].push_back(split_ints(s, 2));
    }
    if (!tasks.empty()) {
      doc["tasks"] = json::array();
      for (const auto& s : tasks) doc["tasks"].push_back(split_ints(s, 2));
    }
    if (!scripted_tasks.empty()) {
      doc["scripted_tasks"] = json::array();
      for (const auto& s : scripted_tasks) doc["scripted_tasks"].push_back(split_ints(s, 3));
    }
    if (!initial_assignment.empty()) {
      doc["initial_assignment"] = json::array();
      for (const auto& s : initial_assignment)
        doc["initial_assignment"].push_back(s == "-" ? std::vector<int>{}
                                                     : split_ints(s, std::nullopt));
    }
  }
};

int run_command(const std::string& config_path, const Overrides& overrides, std::size_t reps,
                std::size_t jobs, const std::string& out_path, const std::string& runlog_dir) {
  json doc = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file '" + config_path + "'");
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument("config '" + config_path + "' is not valid JSON: " + e.what());
    }
  }
  overrides.apply(doc);
  const taskplan::ScenarioConfig config = taskplan::config_from_json(doc);
  if (!config.map.empty()) taskplan::load_map_file(config.map);  // fail fast on a bad map

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write '" + out_path + "'");
    out = &file;
  }
  *out << taskplan::csv_header() << '\n' << std::flush;

  int failures = 0;
  auto on_row = [&](const taskplan::ResultRow& row) {
    *out << taskplan::to_csv(row) << '\n' << std::flush;
    if (!row.error.empty()) {
      ++failures;
      std::cerr << "run seed=" << row.seed << " failed: " << row.error << '\n';
    }
  };
  std::optional<std::string> logs;
  if (!runlog_dir.empty()) logs = runlog_dir;
  taskplan::run_batch(config, reps, jobs, on_row, logs);
  return failures == 0 ? 0 : 3;
}

int genmap_command(const std::string& kind, int width, int height, double density,
                   std::uint64_t seed, const std::string& out_path) {
  const auto map =
      taskplan::generate_map(taskplan::parse_map_kind(kind), width, height, density, seed);
  const std::string text = taskplan::save_map(map);
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online multi-robot task assignment with windowed path finding"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a batch of missions and write one CSV row per run");
  std::string config_path, out_path, runlog_dir;
  std::size_t reps = 1, jobs = 1;
  Overrides overrides;
  run->add_option("--config", config_path, "JSON scenario config")->check(CLI::ExistingFile);
  run->add_option("--reps", reps, "Repetitions (seeds seed .. seed + reps - 1)")
      ->check(CLI::PositiveNumber);
  run->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_option("--out", out_path, "CSV output file (default: stdout)");
  run->add_option("--runlog", runlog_dir, "Directory for per-run NDJSON logs");
  overrides.add_to(*run);

  auto* genmap = app.add_subcommand("genmap", "Generate a map in octile format");
  std::string kind = "random", map_out;
  int width = 32, height = 32;
  double density = 0.2;
  std::uint64_t seed = 1;
  genmap->add_option("--kind", kind, "office|forest|random");
  genmap->add_option("--width", width, "Map width")->check(CLI::PositiveNumber);
  genmap->add_option("--height", height, "Map height")->check(CLI::PositiveNumber);
  genmap->add_option("--density", density, "Obstacle density in [0, 1)");
  genmap->add_option("--seed", seed, "Generator seed");
  genmap->add_option("--out", map_out, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(config_path, overrides, reps, jobs, out_path, runlog_dir);
    return genmap_command(kind, width, height, density, seed, map_out);
  } catch (const taskplan::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
