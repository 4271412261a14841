#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace taskplan {

/// Grid cell. x is the column, y the row counted from the top.
struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  // row-major order
  friend bool operator<(const Cell& a, const Cell& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  }
};

inline int manhattan(Cell a, Cell b) {
  return (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y);
}

class GridMap {
public:
  GridMap(int width, int height);
  GridMap(int width, int height, std::vector<std::uint8_t> obstacles);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return obstacles_.size(); }

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  bool is_open(Cell c) const { return in_bounds(c) && obstacles_[index(c)] == 0; }
  bool is_open(int idx) const { return obstacles_[static_cast<std::size_t>(idx)] == 0; }

  int index(Cell c) const { return c.y * width_ + c.x; }
  Cell cell(int idx) const { return {idx % width_, idx / width_}; }

  void set_obstacle(Cell c, bool obstacle);
  std::size_t open_count() const;
  std::vector<Cell> open_cells() const;

  /// True when every open cell is 4-connected to every other one.
  bool is_connected() const;

  friend bool operator==(const GridMap&, const GridMap&) = default;

private:
  int width_;
  int height_;
  std::vector<std::uint8_t> obstacles_;
};

enum class MapKind { office, forest, random };

MapKind parse_map_kind(std::string_view name);
std::string to_string(MapKind kind);

/// Parses the octile text format: `type octile`, `height H`, `width W`,
/// `map`, then H rows of W characters from {'.', '@', 'T'}.
GridMap load_map(std::string_view text);
GridMap load_map_file(const std::string& path);
std::string save_map(const GridMap& map);

/// Deterministic for a fixed seed. Free space is always one connected
/// component. Throws GenerationError when that cannot be achieved.
GridMap generate_map(MapKind kind, int width, int height, double obstacle_density,
                     std::uint64_t seed);

/// 4-connected unit-edge graph over the open cells of a map, minus an
/// optional set of blocked cells.
class GridGraph {
public:
  explicit GridGraph(std::shared_ptr<const GridMap> map);
  GridGraph(std::shared_ptr<const GridMap> map, std::span<const Cell> blocked);

  const GridMap& map() const { return *map_; }
  std::shared_ptr<const GridMap> map_ptr() const { return map_; }
  bool contains(Cell c) const { return map_->is_open(c) && !blocked_[map_->index(c)]; }
  bool contains(int idx) const { return map_->is_open(idx) && !blocked_[idx]; }
  bool has_blocked() const { return n_blocked_ > 0; }
  std::vector<Cell> blocked_cells() const;

  /// Neighbors of an in-graph vertex in fixed order (up, left, right, down),
  /// i.e. ascending row-major index.
  int neighbors(int idx, int out[4]) const;

  /// Hop distances from `source`; -1 marks unreachable vertices.
  std::vector<int> bfs(Cell source) const;

private:
  std::shared_ptr<const GridMap> map_;
  std::vector<bool> blocked_;
  std::size_t n_blocked_ = 0;
};

}  // namespace taskplan
