#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <json.hpp>

namespace taskplan {

/// Marks a robot/task pairing that cannot be traversed.
inline constexpr double kInfeasibleCost = std::numeric_limits<double>::infinity();

/// Per-robot (M+1)x(M+1) travel costs. Index 0 is the robot's effective
/// start; index k >= 1 is the k-th task of the ordered task list the matrix
/// was built from. The first column is zero so the return leg is free.
///
/// `base_cost` is the remaining cost of work the robot already carries. It
/// is folded into every first-row entry and is also the robot's cost when it
/// receives no new task.
class CostMatrix {
public:
  CostMatrix() : CostMatrix(0, 0) {}
  CostMatrix(std::size_t owner, std::size_t task_count, double base_cost = 0.0);

  std::size_t owner() const { return owner_; }
  std::size_t dim() const { return dim_; }
  std::size_t task_count() const { return dim_ - 1; }
  double base_cost() const { return base_cost_; }

  double at(std::size_t from, std::size_t to) const { return data_[from * dim_ + to]; }
  double& at(std::size_t from, std::size_t to) { return data_[from * dim_ + to]; }

  /// Cost of start -> slots[0] -> slots[1] -> ... where a slot s is the
  /// matrix index s + 1. An empty sequence costs `base_cost`.
  double sequence_cost(std::span<const std::size_t> slots) const;

  bool all_integral() const;

  friend bool operator==(const CostMatrix&, const CostMatrix&) = default;

private:
  std::size_t owner_;
  std::size_t dim_;
  double base_cost_;
  std::vector<double> data_;
};

/// Debug dump: row-major arrays per robot, infeasible entries as null.
nlohmann::json to_json(std::span<const CostMatrix> matrices);
std::vector<CostMatrix> matrices_from_json(const nlohmann::json& doc);

}  // namespace taskplan
