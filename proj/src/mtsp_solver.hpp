#pragma once

// Exact sum-of-costs multi-depot open mTSP under a per-robot cost cap.
//
// For every robot a Held-Karp pass gives the cheapest open tour over each
// task subset. A cap probe then partitions the task set across robots by a
// subset DP that only uses subsets whose tour fits under the cap. The
// per-robot subset tables are built once and reused across probes.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "taskplan/cost_matrix.hpp"

namespace taskplan::detail {

inline constexpr std::size_t kMaxExactTasks = 20;

struct Partition {
  std::vector<std::uint32_t> subsets;  // per robot, bit s = task slot s
  double sum_of_costs = 0.0;
  double makespan = 0.0;
};

class MtspSolver {
public:
  explicit MtspSolver(std::span<const CostMatrix> matrices);

  std::size_t robots() const { return tables_.size(); }
  std::size_t tasks() const { return tasks_; }
  bool integral() const { return integral_; }

  double subset_cost(std::size_t robot, std::uint32_t subset) const {
    return tables_[robot][subset];
  }

  /// Minimum sum-of-costs partition with every robot cost <= cap, if any.
  std::optional<Partition> solve(std::optional<double> cap) const;

private:
  std::size_t tasks_ = 0;
  bool integral_ = true;
  std::vector<std::vector<double>> tables_;
};

/// Cheapest open tour from index 0 over every subset of `slots` (bit i of
/// the returned index = slots[i]). Entry 0 is `base_cost`.
std::vector<double> subset_tour_costs(const CostMatrix& m, std::span<const std::size_t> slots);

/// Optimal visiting order of `slots` from index 0.
std::vector<std::size_t> best_order(const CostMatrix& m, std::span<const std::size_t> slots);

}  // namespace taskplan::detail
