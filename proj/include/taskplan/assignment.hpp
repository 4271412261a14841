#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "taskplan/cost_matrix.hpp"

namespace taskplan {

/// Per-robot ordered task sequences. Entries are task labels: matrix slots
/// (slot s is matrix index s + 1) at the solver level, task ids elsewhere.
struct Assignment {
  std::vector<std::vector<std::size_t>> sequences;

  Assignment() = default;
  explicit Assignment(std::size_t robots) : sequences(robots) {}

  std::size_t robots() const { return sequences.size(); }
  std::size_t task_count() const;
  bool contains(std::size_t task) const;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Makespan bookkeeping owned by the mission driver.
struct BoundState {
  double omega = 0.0;          // lower bound for the current search
  double upper = 0.0;          // upper bound for the current search
  double tracked_lower = 0.0;  // lower bound carried across windows
  double gamma = 1.5;          // accept a partial solution while J <= gamma * tracked_lower
  double mu = 1.05;            // bisection stops once upper - omega <= omega * (mu - 1)
  double gap_threshold = 0.0;  // <= 0 means derive from omega and mu

  /// omega * (mu - 1), or `gap_threshold` when set explicitly.
  double effective_gap() const;
};

enum class ReassignMode { partial, complete };

struct AssignmentOutcome {
  Assignment assignment;
  double makespan = 0.0;
  double sum_of_costs = 0.0;
  ReassignMode mode = ReassignMode::complete;
  int iterations = 0;  // bisection probes
  // Proven lower bound on the optimal makespan of the instance solved. It
  // equals `makespan` whenever the search proved optimality.
  double lower_bound = 0.0;
};

/// Minimum sum-of-costs assignment with every robot cost <= cap. Absent if
/// no assignment fits. Exact for up to 20 tasks.
std::optional<Assignment> sum_of_costs_mtsp(std::span<const CostMatrix> matrices,
                                            std::optional<double> cap = std::nullopt);

/// Lower bound: M-th cheapest finite task-entering leg (off-diagonal, column
/// >= 1) over all matrices, capped by the upper bound. Upper bound: makespan
/// of the unconstrained sum-of-costs optimum.
std::pair<double, double> default_bounds(std::span<const CostMatrix> matrices,
                                         std::size_t task_count);

/// Min-max assignment by bisection on the per-robot cap between
/// bounds.omega and bounds.upper. The result is within mu of optimal and has
/// the lowest sum-of-costs among assignments with that makespan.
AssignmentOutcome minmax_assign(std::span<const CostMatrix> matrices, const BoundState& bounds);

/// Optimal visiting order of `slots` from the matrix start, ignoring the
/// return leg.
std::vector<std::size_t> single_agent_tsp(const CostMatrix& matrix,
                                          std::span<const std::size_t> slots);

/// J = max over robots of the chained sequence cost under `matrices`.
double assignment_makespan(const Assignment& assignment, std::span<const CostMatrix> matrices);

/// Builds a plain (no carried work) matrix for `robot` from its current
/// position over `tasks`, in that order.
using MatrixBuilder =
    std::function<CostMatrix(std::size_t robot, std::span<const std::size_t> tasks)>;

/// Appends `new_tasks` to the existing sequences without moving old tasks
/// between robots, then re-sequences every robot that had work and received
/// new tasks. `modified` holds one matrix per robot over `new_tasks` (in
/// order), built with carried work for robots that already hold tasks.
/// The returned makespan is measured with `plain`.
AssignmentOutcome partial_reassign(const Assignment& previous,
                                   std::span<const std::size_t> new_tasks,
                                   std::span<const CostMatrix> modified, const BoundState& bounds,
                                   const MatrixBuilder& plain);

enum class BoundDecision { accept, full_reassign };

/// full_reassign iff partial_makespan > gamma * tracked_lower.
BoundDecision check_bound(double partial_makespan, const BoundState& bounds);

/// tracked_lower -= elapsed, clamped at zero.
BoundState update_tracked_lower(BoundState bounds, double elapsed);

}  // namespace taskplan
