#include "taskplan/path.hpp"

#include <stdexcept>

#include "taskplan/errors.hpp"

namespace taskplan {

Path concatenate(const Path& head, const Path& tail) {
  if (head.empty()) return tail;
  if (tail.empty()) return head;
  if (!(head.back().cell == tail.front().cell))
    throw InvalidPathError("paths do not share an endpoint");
  Path out = head;
  const double shift = head.back().time - tail.front().time;
  for (std::size_t i = 1; i < tail.size(); ++i)
    out.entries.push_back({tail.entries[i].cell, tail.entries[i].time + shift});
  return out;
}

std::pair<Path, Path> split(const Path& path, std::size_t at) {
  if (at >= path.size()) throw std::out_of_range("split index past end of path");
  Path a, b;
  a.entries.assign(path.entries.begin(), path.entries.begin() + static_cast<long>(at) + 1);
  b.entries.assign(path.entries.begin() + static_cast<long>(at), path.entries.end());
  return {std::move(a), std::move(b)};
}

Cell cell_at(const Path& path, int t) {
  if (path.empty()) throw InvalidPathError("empty path");
  if (t <= 0) return path.front().cell;
  if (static_cast<std::size_t>(t) >= path.size()) return path.back().cell;
  return path.entries[static_cast<std::size_t>(t)].cell;
}

}  // namespace taskplan
