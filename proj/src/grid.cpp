#include "taskplan/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include "taskplan/errors.hpp"

namespace taskplan {

GridMap::GridMap(int width, int height)
    : GridMap(width, height,
              std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                        static_cast<std::size_t>(std::max(height, 0)))) {}

GridMap::GridMap(int width, int height, std::vector<std::uint8_t> obstacles)
    : width_(width), height_(height), obstacles_(std::move(obstacles)) {
  if (width < 1 || height < 1) throw std::invalid_argument("map dimensions must be >= 1");
  if (obstacles_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw std::invalid_argument("obstacle mask does not match map dimensions");
}

void GridMap::set_obstacle(Cell c, bool obstacle) {
  if (!in_bounds(c)) throw InvalidVertexError("cell outside map");
  obstacles_[index(c)] = obstacle ? 1 : 0;
}

std::size_t GridMap::open_count() const {
  return static_cast<std::size_t>(std::count(obstacles_.begin(), obstacles_.end(), 0));
}

std::vector<Cell> GridMap::open_cells() const {
  std::vector<Cell> out;
  for (int i = 0; i < static_cast<int>(size()); ++i)
    if (is_open(i)) out.push_back(cell(i));
  return out;
}

bool GridMap::is_connected() const {
  int first = -1;
  for (int i = 0; i < static_cast<int>(size()); ++i)
    if (is_open(i)) {
      first = i;
      break;
    }
  if (first < 0) return true;
  GridGraph g(std::make_shared<const GridMap>(*this));
  auto dist = g.bfs(cell(first));
  for (int i = 0; i < static_cast<int>(size()); ++i)
    if (is_open(i) && dist[i] < 0) return false;
  return true;
}

MapKind parse_map_kind(std::string_view name) {
  if (name == "office") return MapKind::office;
  if (name == "forest") return MapKind::forest;
  if (name == "random") return MapKind::random;
  throw std::invalid_argument("unknown map kind '" + std::string(name) + "'");
}

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::office: return "office";
    case MapKind::forest: return "forest";
    case MapKind::random: return "random";
  }
  return "unknown";
}

namespace {

bool read_keyed_int(const std::string& line, std::string_view key, int& out) {
  std::istringstream ss(line);
  std::string k;
  long long v = 0;
  if (!(ss >> k) || k != key || !(ss >> v)) return false;
  std::string rest;
  if (ss >> rest) return false;
  if (v < 1 || v > 1'000'000) return false;
  out = static_cast<int>(v);
  return true;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

GridMap load_map(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, std::string("missing ") + what);
    ++lineno;
    line = strip_cr(line);
  };

  next("type line");
  {
    std::istringstream ss(line);
    std::string k, v;
    if (!(ss >> k >> v) || k != "type") throw ParseError(lineno, "expected 'type <name>'");
  }
  int height = 0, width = 0;
  next("height line");
  if (!read_keyed_int(line, "height", height)) throw ParseError(lineno, "expected 'height <H>'");
  next("width line");
  if (!read_keyed_int(line, "width", width)) throw ParseError(lineno, "expected 'width <W>'");
  next("map line");
  if (line != "map") throw ParseError(lineno, "expected 'map'");

  std::vector<std::uint8_t> obstacles;
  obstacles.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int row = 0; row < height; ++row) {
    next("map row");
    if (static_cast<int>(line.size()) != width)
      throw ParseError(lineno, "row has " + std::to_string(line.size()) + " cells, expected " +
                                   std::to_string(width));
    for (char ch : line) {
      switch (ch) {
        case '.': obstacles.push_back(0); break;
        case '@':
        case 'T': obstacles.push_back(1); break;
        default: throw ParseError(lineno, std::string("unknown cell character '") + ch + "'");
      }
    }
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!strip_cr(line).empty()) throw ParseError(lineno, "trailing content after map rows");
  }
  return GridMap(width, height, std::move(obstacles));
}

GridMap load_map_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open map file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return load_map(ss.str());
}

std::string save_map(const GridMap& map) {
  std::string out = "type octile\nheight " + std::to_string(map.height()) + "\nwidth " +
                    std::to_string(map.width()) + "\nmap\n";
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) out += map.is_open(Cell{x, y}) ? '.' : '@';
    out += '\n';
  }
  return out;
}

namespace {

constexpr int kMaxGenerationAttempts = 20;

std::size_t target_obstacles(int width, int height, double density) {
  return static_cast<std::size_t>(std::llround(density * width * height));
}

// Adds obstacles one at a time from a shuffled candidate order, skipping any
// placement that would split the free space.
bool scatter(GridMap& map, std::size_t target, std::mt19937_64& rng, bool isolated) {
  std::vector<int> order(map.size());
  for (int i = 0; i < static_cast<int>(order.size()); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::size_t placed = 0;
  for (int idx : order) {
    if (placed == target) break;
    Cell c = map.cell(idx);
    if (isolated) {
      bool clear = true;
      for (int dy = -1; dy <= 1 && clear; ++dy)
        for (int dx = -1; dx <= 1 && clear; ++dx) {
          Cell n{c.x + dx, c.y + dy};
          if (map.in_bounds(n) && !map.is_open(n)) clear = false;
        }
      if (!clear) continue;
    }
    map.set_obstacle(c, true);
    if (map.open_count() == 0 || !map.is_connected()) {
      map.set_obstacle(c, false);
      continue;
    }
    ++placed;
  }
  return placed == target;
}

GridMap make_office(int width, int height, double density, std::mt19937_64& rng) {
  GridMap map(width, height);
  if (density <= 0.0) return map;
  // Interior walls on a regular partition; wall fraction is roughly 2/pitch.
  const int pitch = std::max(4, static_cast<int>(std::lround(2.0 / density)));
  std::vector<int> xs, ys;
  for (int x = pitch; x < width - 1; x += pitch) xs.push_back(x);
  for (int y = pitch; y < height - 1; y += pitch) ys.push_back(y);
  for (int x : xs)
    for (int y = 0; y < height; ++y) map.set_obstacle({x, y}, true);
  for (int y : ys)
    for (int x = 0; x < width; ++x) map.set_obstacle({x, y}, true);

  auto spans = [](const std::vector<int>& walls, int extent) {
    std::vector<std::pair<int, int>> out;
    int lo = 0;
    for (int w : walls) {
      out.emplace_back(lo, w - 1);
      lo = w + 1;
    }
    out.emplace_back(lo, extent - 1);
    return out;
  };
  auto pick = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  for (int x : xs)
    for (auto [y0, y1] : spans(ys, height))
      if (y0 <= y1) map.set_obstacle({x, pick(y0, y1)}, false);
  for (int y : ys)
    for (auto [x0, x1] : spans(xs, width))
      if (x0 <= x1) map.set_obstacle({pick(x0, x1), y}, false);
  return map;
}

}  // namespace

GridMap generate_map(MapKind kind, int width, int height, double obstacle_density,
                     std::uint64_t seed) {
  if (!(obstacle_density >= 0.0 && obstacle_density < 1.0))
    throw std::invalid_argument("obstacle density must lie in [0, 1)");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    GridMap map(width, height);
    bool ok = true;
    switch (kind) {
      case MapKind::office: map = make_office(width, height, obstacle_density, rng); break;
      case MapKind::forest:
        ok = scatter(map, target_obstacles(width, height, obstacle_density), rng, true);
        break;
      case MapKind::random:
        ok = scatter(map, target_obstacles(width, height, obstacle_density), rng, false);
        break;
    }
    if (ok && map.open_count() > 0 && map.is_connected()) return map;
  }
  throw GenerationError("could not generate a connected " + to_string(kind) + " map at density " +
                        std::to_string(obstacle_density));
}

GridGraph::GridGraph(std::shared_ptr<const GridMap> map) : GridGraph(std::move(map), {}) {}

GridGraph::GridGraph(std::shared_ptr<const GridMap> map, std::span<const Cell> blocked)
    : map_(std::move(map)), blocked_(map_->size(), false) {
  for (Cell c : blocked) {
    if (!map_->in_bounds(c)) continue;
    if (!blocked_[map_->index(c)]) ++n_blocked_;
    blocked_[map_->index(c)] = true;
  }
}

std::vector<Cell> GridGraph::blocked_cells() const {
  std::vector<Cell> out;
  for (int i = 0; i < static_cast<int>(blocked_.size()); ++i)
    if (blocked_[i]) out.push_back(map_->cell(i));
  return out;
}

int GridGraph::neighbors(int idx, int out[4]) const {
  const int w = map_->width();
  const int x = idx % w;
  int n = 0;
  if (idx - w >= 0 && contains(idx - w)) out[n++] = idx - w;
  if (x > 0 && contains(idx - 1)) out[n++] = idx - 1;
  if (x + 1 < w && contains(idx + 1)) out[n++] = idx + 1;
  if (idx + w < static_cast<int>(map_->size()) && contains(idx + w)) out[n++] = idx + w;
  return n;
}

std::vector<int> GridGraph::bfs(Cell source) const {
  std::vector<int> dist(map_->size(), -1);
  if (!contains(source)) return dist;
  std::vector<int> frontier{map_->index(source)};
  dist[frontier.front()] = 0;
  std::size_t head = 0;
  int nb[4];
  while (head < frontier.size()) {
    int v = frontier[head++];
    int n = neighbors(v, nb);
    for (int k = 0; k < n; ++k)
      if (dist[nb[k]] < 0) {
        dist[nb[k]] = dist[v] + 1;
        frontier.push_back(nb[k]);
      }
  }
  return dist;
}

}  // namespace taskplan
