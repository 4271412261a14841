#include "taskplan/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "taskplan/errors.hpp"

namespace taskplan {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Cell cell_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("cells are [x, y] pairs");
  return {j[0].get<int>(), j[1].get<int>()};
}

json cell_to_json(Cell c) { return json::array({c.x, c.y}); }

template <class T>
void read(const json& doc, const char* key, T& out) {
  if (auto it = doc.find(key); it != doc.end()) out = it->get<T>();
}

std::vector<Cell> distinct_cells(const GridMap& map, std::size_t count,
                                 const std::vector<Cell>& exclude, std::uint64_t seed,
                                 const char* what) {
  std::vector<Cell> pool;
  for (Cell c : map.open_cells())
    if (std::find(exclude.begin(), exclude.end(), c) == exclude.end()) pool.push_back(c);
  if (pool.size() < count)
    throw std::invalid_argument(std::string("map has too few free cells for ") + what);
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(count);
  return pool;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (scenario_id.empty()) fail("scenario_id must not be empty");
  if (map.empty()) {
    if (width < 2 || height < 2) fail("width and height must be at least 2");
    if (!(density >= 0.0 && density < 1.0)) fail("density must lie in [0, 1)");
  }
  if (robots == 0) fail("robots must be positive");
  if (!starts.empty() && starts.size() != robots) fail("starts must list one cell per robot");
  if (!(collision_radius > 0.0)) fail("collision_radius must be positive");
  if (!(generation_probability >= 0.0 && generation_probability <= 1.0))
    fail("generation_probability must lie in [0, 1]");
  if (!(gamma >= 1.0)) fail("gamma must be >= 1");
  if (!(mu > 1.0)) fail("mu must be > 1");
  if (gap_threshold < 0.0) fail("gap_threshold must be >= 0");
  if (exec_horizon < 1 || plan_horizon < exec_horizon)
    fail("exec_horizon must lie in [1, plan_horizon]");
  if (!(progress_epsilon >= 0.0)) fail("progress_epsilon must be >= 0");
  if (node_budget == 0) fail("node_budget must be positive");
  if (!(cutoff > 0.0)) fail("cutoff must be positive");
  if (max_timesteps <= 0) fail("max_timesteps must be positive");
  for (const auto& s : scripted_tasks)
    if (s.time < 0) fail("scripted task times must be >= 0");
  if (!initial_assignment.empty()) {
    if (tasks.empty()) fail("initial_assignment needs explicit tasks");
    if (initial_assignment.size() != robots) fail("initial_assignment must list every robot");
    std::vector<int> seen(tasks.size(), 0);
    for (const auto& seq : initial_assignment)
      for (std::size_t k : seq) {
        if (k >= tasks.size()) fail("initial_assignment refers to a missing task");
        ++seen[k];
      }
    if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
      fail("initial_assignment must hold every task exactly once");
  }
}

ScenarioConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::vector<std::string> known{
      "scenario_id", "map", "map_kind", "width", "height", "density", "robots", "starts",
      "collision_radius", "initial_tasks", "tasks", "queued_tasks", "scripted_tasks",
      "generation_probability", "gamma", "mu", "gap_threshold", "plan_horizon", "exec_horizon",
      "progress_epsilon", "node_budget", "method", "seed", "cutoff", "max_timesteps",
      "initial_assignment"};
  for (const auto& [key, value] : doc.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("unknown config field '" + key + "'");

  ScenarioConfig c;
  try {
    read(doc, "scenario_id", c.scenario_id);
    read(doc, "map", c.map);
    if (doc.contains("map_kind")) c.map_kind = parse_map_kind(doc["map_kind"].get<std::string>());
    read(doc, "width", c.width);
    read(doc, "height", c.height);
    read(doc, "density", c.density);
    read(doc, "robots", c.robots);
    if (doc.contains("starts"))
      for (const auto& j : doc["starts"]) c.starts.push_back(cell_from_json(j));
    read(doc, "collision_radius", c.collision_radius);
    read(doc, "initial_tasks", c.initial_tasks);
    if (doc.contains("tasks"))
      for (const auto& j : doc["tasks"]) c.tasks.push_back(cell_from_json(j));
    read(doc, "queued_tasks", c.queued_tasks);
    if (doc.contains("scripted_tasks"))
      for (const auto& j : doc["scripted_tasks"]) {
        if (!j.is_array() || j.size() != 3)
          throw std::invalid_argument("scripted tasks are [time, x, y] triples");
        c.scripted_tasks.push_back({j[0].get<int>(), {j[1].get<int>(), j[2].get<int>()}});
      }
    read(doc, "generation_probability", c.generation_probability);
    read(doc, "gamma", c.gamma);
    read(doc, "mu", c.mu);
    read(doc, "gap_threshold", c.gap_threshold);
    read(doc, "plan_horizon", c.plan_horizon);
    read(doc, "exec_horizon", c.exec_horizon);
    read(doc, "progress_epsilon", c.progress_epsilon);
    read(doc, "node_budget", c.node_budget);
    if (doc.contains("method")) c.method = parse_method(doc["method"].get<std::string>());
    read(doc, "seed", c.seed);
    read(doc, "cutoff", c.cutoff);
    read(doc, "max_timesteps", c.max_timesteps);
    read(doc, "initial_assignment", c.initial_assignment);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  if (!c.tasks.empty()) c.initial_tasks = c.tasks.size();
  if (!c.starts.empty() && !doc.contains("robots")) c.robots = c.starts.size();
  c.validate();
  return c;
}

json to_json(const ScenarioConfig& c) {
  json doc{{"scenario_id", c.scenario_id},
           {"map_kind", to_string(c.map_kind)},
           {"width", c.width},
           {"height", c.height},
           {"density", c.density},
           {"robots", c.robots},
           {"collision_radius", c.collision_radius},
           {"initial_tasks", c.initial_tasks},
           {"queued_tasks", c.queued_tasks},
           {"generation_probability", c.generation_probability},
           {"gamma", c.gamma},
           {"mu", c.mu},
           {"gap_threshold", c.gap_threshold},
           {"plan_horizon", c.plan_horizon},
           {"exec_horizon", c.exec_horizon},
           {"progress_epsilon", c.progress_epsilon},
           {"node_budget", c.node_budget},
           {"method", to_string(c.method)},
           {"seed", c.seed},
           {"cutoff", c.cutoff},
           {"max_timesteps", c.max_timesteps}};
  if (!c.map.empty()) doc["map"] = c.map;
  if (!c.initial_assignment.empty()) doc["initial_assignment"] = c.initial_assignment;
  if (!c.starts.empty()) {
    doc["starts"] = json::array();
    for (Cell s : c.starts) doc["starts"].push_back(cell_to_json(s));
  }
  if (!c.tasks.empty()) {
    doc["tasks"] = json::array();
    for (Cell t : c.tasks) doc["tasks"].push_back(cell_to_json(t));
  }
  if (!c.scripted_tasks.empty()) {
    doc["scripted_tasks"] = json::array();
    for (const auto& s : c.scripted_tasks)
      doc["scripted_tasks"].push_back(json::array({s.time, s.location.x, s.location.y}));
  }
  return doc;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

SeedSet derive_seeds(std::uint64_t base) {
  return {splitmix64(base * 4 + 0), splitmix64(base * 4 + 1), splitmix64(base * 4 + 2),
          splitmix64(base * 4 + 3)};
}

Instance build_instance(const ScenarioConfig& c, std::uint64_t seed) {
  c.validate();
  const SeedSet seeds = derive_seeds(seed);
  Instance inst;
  inst.map = std::make_shared<const GridMap>(
      c.map.empty() ? generate_map(c.map_kind, c.width, c.height, c.density, seeds.map)
                    : load_map_file(c.map));
  const GridMap& map = *inst.map;

  std::vector<Cell> starts = c.starts;
  if (starts.empty()) starts = distinct_cells(map, c.robots, {}, seeds.starts, "robot starts");
  auto graph = std::make_shared<const GridGraph>(inst.map);
  for (std::size_t r = 0; r < starts.size(); ++r) {
    if (!map.is_open(starts[r])) throw std::invalid_argument("robot start on a blocked cell");
    RobotProfile p;
    p.id = r;
    p.start = starts[r];
    p.collision_radius = c.collision_radius;
    p.graph = graph;
    inst.robots.push_back(p);
  }

  inst.initial_tasks = c.tasks;
  if (inst.initial_tasks.empty() && c.initial_tasks > 0)
    inst.initial_tasks = distinct_cells(map, c.initial_tasks, starts, seeds.tasks, "tasks");
  for (Cell t : inst.initial_tasks)
    if (!map.is_open(t)) throw std::invalid_argument("initial task on a blocked cell");
  inst.scripted = c.scripted_tasks;
  for (const auto& s : inst.scripted)
    if (!map.is_open(s.location)) throw std::invalid_argument("scripted task on a blocked cell");
  if (!c.initial_assignment.empty()) {
    inst.pinned = Assignment(inst.robots.size());
    inst.pinned->sequences = c.initial_assignment;
  }

  MissionConfig& m = inst.mission;
  m.gamma = c.gamma;
  m.mu = c.mu;
  m.gap_threshold = c.gap_threshold;
  m.window = {c.plan_horizon, c.exec_horizon};
  m.progress_epsilon = c.progress_epsilon;
  m.generation_probability = c.generation_probability;
  m.node_budget = c.node_budget;
  m.task_seed = seeds.generation;
  m.cutoff_s = c.cutoff;
  m.max_timesteps = c.max_timesteps;
  return inst;
}

std::string csv_header() {
  return "scenario_id,method,seed,makespan,runtime_s,timed_out,n_partial,n_complete,tasks_total";
}

std::string to_csv(const ResultRow& r) {
  std::ostringstream out;
  out << r.scenario_id << ',' << r.method << ',' << r.seed << ',' << r.makespan << ','
      << format_double(r.runtime_s) << ',' << (r.timed_out ? 1 : 0) << ',' << r.n_partial << ','
      << r.n_complete << ',' << r.tasks_total;
  return out.str();
}

ResultRow run_single(const ScenarioConfig& c, std::uint64_t seed, MissionRun* run_out) {
  ResultRow row;
  row.scenario_id = c.scenario_id;
  row.method = to_string(c.method);
  row.seed = seed;
  row.tasks_total = c.initial_tasks + c.queued_tasks + c.scripted_tasks.size();
  try {
    Instance inst = build_instance(c, seed);
    MissionState state = initialize(inst.map, inst.robots, inst.initial_tasks, inst.mission,
                                    c.method, c.queued_tasks, inst.scripted);
    if (inst.pinned) state.assignment = *inst.pinned;
    MissionRun run = run_mission(std::move(state));
    row.makespan = run.metrics.makespan;
    row.runtime_s = run.metrics.runtime_after_initial;
    row.solver_s = run.metrics.solver_s;
    row.timed_out = run.metrics.timed_out;
    row.n_partial = run.metrics.n_partial;
    row.n_complete = run.metrics.n_complete;
    row.tasks_total = run.metrics.tasks_total;
    if (run_out) *run_out = std::move(run);
  } catch (const std::exception& e) {
    row.makespan = -1;
    row.timed_out = true;
    row.error = e.what();
  }
  return row;
}

std::vector<ResultRow> run_batch(const ScenarioConfig& c, std::size_t repetitions,
                                 std::size_t jobs,
                                 const std::function<void(const ResultRow&)>& on_row,
                                 const std::optional<std::string>& runlog_dir) {
  c.validate();
  if (runlog_dir) std::filesystem::create_directories(*runlog_dir);
  std::vector<std::optional<ResultRow>> slots(repetitions);
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < repetitions;) {
      const std::uint64_t seed = c.seed + i;
      MissionRun run;
      ResultRow row = run_single(c, seed, runlog_dir ? &run : nullptr);
      if (runlog_dir && row.error.empty()) {
        try {
          emit_runlog(run, (std::filesystem::path(*runlog_dir) / runlog_name(c, seed)).string());
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
      std::lock_guard lock(mu);
      slots[i] = std::move(row);
      ready.notify_all();
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, repetitions));
  std::vector<std::thread> threads;
  if (n_threads == 1) worker();
  else
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);

  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < repetitions; ++i) {
    std::unique_lock lock(mu);
    ready.wait(lock, [&] { return slots[i].has_value(); });
    rows.push_back(*slots[i]);
    lock.unlock();
    if (on_row) on_row(rows.back());
  }
  for (auto& t : threads) t.join();
  return rows;
}

json to_json(const RunLogRecord& r) {
  json broadcast = json::array();
  for (Cell c : r.broadcast) broadcast.push_back(cell_to_json(c));
  return json{{"schema_version", kRunLogSchemaVersion},
              {"record", "window"},
              {"clock", r.clock},
              {"omega", r.omega},
              {"n_incomplete", r.n_incomplete},
              {"n_unassigned", r.n_unassigned},
              {"decision", to_string(r.decision)},
              {"makespan", r.makespan},
              {"partial_makespan", optional_number(r.partial_makespan)},
              {"gate_omega", optional_number(r.gate_omega)},
              {"search_lower", optional_number(r.search_lower)},
              {"search_upper", optional_number(r.search_upper)},
              {"probes", r.probes},
              {"wall_s", r.wall_s},
              {"plan_ok", r.plan_ok},
              {"tasks_generated", r.tasks_generated},
              {"tasks_completed", r.tasks_completed},
              {"deadlocked", r.deadlocked},
              {"broadcast", broadcast}};
}

json paths_to_json(std::span<const Path> paths) {
  json out = json::array();
  for (const auto& p : paths) {
    json entries = json::array();
    for (const auto& w : p.entries) entries.push_back(json::array({w.cell.x, w.cell.y, w.time}));
    out.push_back(entries);
  }
  return out;
}

void write_runlog(const MissionRun& run, std::ostream& out) {
  for (const auto& r : run.log) out << to_json(r).dump() << '\n';
  out << json{{"schema_version", kRunLogSchemaVersion},
              {"record", "trajectories"},
              {"paths", paths_to_json(run.trajectories)}}
             .dump()
      << '\n';
}

void emit_runlog(const MissionRun& run, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write run log '" + path + "'");
  write_runlog(run, out);
  if (!out) throw std::runtime_error("failed writing run log '" + path + "'");
}

std::string runlog_name(const ScenarioConfig& c, std::uint64_t seed) {
  return c.scenario_id + "_" + to_string(c.method) + "_" + std::to_string(seed) + ".ndjson";
}

}  // namespace taskplan
