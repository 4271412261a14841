#include "taskplan/assignment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "mtsp_solver.hpp"
#include "taskplan/errors.hpp"

namespace taskplan {

namespace {

constexpr double kEps = 1e-9;

void require_reachable(std::span<const CostMatrix> matrices, std::span<const std::size_t> labels) {
  if (matrices.empty()) throw ContractError("at least one cost matrix is required");
  const std::size_t m = matrices.front().task_count();
  for (std::size_t k = 1; k <= m; ++k) {
    bool reachable = false;
    for (const auto& c : matrices) reachable = reachable || std::isfinite(c.at(0, k));
    if (!reachable) {
      const std::size_t label = labels.empty() ? k - 1 : labels[k - 1];
      throw InfeasibleTaskError(label, "task " + std::to_string(label) + " is unreachable by every robot");
    }
  }
}

Assignment to_assignment(const detail::Partition& p, std::span<const CostMatrix> matrices) {
  Assignment out(matrices.size());
  for (std::size_t r = 0; r < matrices.size(); ++r) {
    std::vector<std::size_t> slots;
    for (std::uint32_t rest = p.subsets[r]; rest; rest &= rest - 1)
      slots.push_back(static_cast<std::size_t>(std::countr_zero(rest)));
    out.sequences[r] = detail::best_order(matrices[r], slots);
  }
  return out;
}

}  // namespace

std::size_t Assignment::task_count() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.size();
  return n;
}

bool Assignment::contains(std::size_t task) const {
  for (const auto& s : sequences)
    if (std::find(s.begin(), s.end(), task) != s.end()) return true;
  return false;
}

double BoundState::effective_gap() const {
  return gap_threshold > 0.0 ? gap_threshold : omega * (mu - 1.0);
}

std::optional<Assignment> sum_of_costs_mtsp(std::span<const CostMatrix> matrices,
                                            std::optional<double> cap) {
  if (cap && *cap < 0.0) throw ContractError("cost cap must be non-negative");
  detail::MtspSolver solver(matrices);
  auto p = solver.solve(cap);
  if (!p) return std::nullopt;
  return to_assignment(*p, matrices);
}

std::pair<double, double> default_bounds(std::span<const CostMatrix> matrices,
                                         std::size_t task_count) {
  detail::MtspSolver solver(matrices);
  if (solver.tasks() != task_count)
    throw ContractError("task count does not match the cost matrices");
  require_reachable(matrices, {});

  // Every task is entered through one distinct off-diagonal entry, so the
  // M-th smallest such entry never exceeds the largest leg of any solution.
  double omega = 0.0;
  if (task_count > 0) {
    std::vector<double> legs;
    for (const auto& m : matrices)
      for (std::size_t j = 0; j < m.dim(); ++j)
        for (std::size_t k = 1; k < m.dim(); ++k) {
          const double v = m.at(j, k);
          if (j != k && std::isfinite(v)) legs.push_back(v);
        }
    if (legs.size() < task_count) throw ContractError("too few finite costs for a lower bound");
    std::nth_element(legs.begin(), legs.begin() + static_cast<long>(task_count - 1), legs.end());
    omega = legs[task_count - 1];
  }
  auto p = solver.solve(std::nullopt);
  if (!p) throw ContractError("no feasible assignment exists");
  return {std::min(omega, p->makespan), p->makespan};
}

AssignmentOutcome minmax_assign(std::span<const CostMatrix> matrices, const BoundState& bounds) {
  detail::MtspSolver solver(matrices);
  AssignmentOutcome out;
  out.mode = ReassignMode::complete;

  if (solver.tasks() == 0) {
    auto p = solver.solve(std::nullopt);
    if (!p) throw ContractError("no feasible assignment exists");
    out.assignment = to_assignment(*p, matrices);
    out.makespan = p->makespan;
    out.sum_of_costs = p->sum_of_costs;
    out.lower_bound = p->makespan;
    return out;
  }

  double lo = bounds.omega;
  double hi = bounds.upper;
  if (lo < 0.0 || lo > hi + kEps) throw ContractError("bounds must satisfy 0 <= omega <= upper");
  const double gap = bounds.effective_gap();
  if (!(gap > 0.0)) throw ContractError("bisection gap threshold must be positive");

  auto best = solver.solve(hi);
  if (!best) throw ContractError("upper bound admits no feasible assignment");
  hi = best->makespan;

  // With integral costs an infeasible cap p proves J_opt >= floor(p) + 1.
  const bool integral = solver.integral();
  double proven = integral ? std::ceil(lo - kEps) : lo;

  while (hi - lo > gap && hi > proven + kEps) {
    const double p = 0.5 * (lo + hi);
    ++out.iterations;
    if (auto r = solver.solve(p)) {
      hi = r->makespan;
      best = std::move(r);
    } else {
      lo = p;
      proven = std::max(proven, integral ? std::floor(p + kEps) + 1.0 : p);
    }
  }
  // Lowest sum-of-costs among assignments that reach the final makespan.
  best = solver.solve(hi);

  out.assignment = to_assignment(*best, matrices);
  out.makespan = best->makespan;
  out.sum_of_costs = best->sum_of_costs;
  out.lower_bound = std::min(proven, best->makespan);
  return out;
}

std::vector<std::size_t> single_agent_tsp(const CostMatrix& matrix,
                                          std::span<const std::size_t> slots) {
  return detail::best_order(matrix, slots);
}

double assignment_makespan(const Assignment& assignment, std::span<const CostMatrix> matrices) {
  if (assignment.robots() != matrices.size())
    throw ContractError("assignment and matrices disagree on robot count");
  double j = 0.0;
  for (std::size_t r = 0; r < matrices.size(); ++r)
    j = std::max(j, matrices[r].sequence_cost(assignment.sequences[r]));
  return j;
}

AssignmentOutcome partial_reassign(const Assignment& previous,
                                   std::span<const std::size_t> new_tasks,
                                   std::span<const CostMatrix> modified, const BoundState& bounds,
                                   const MatrixBuilder& plain) {
  const std::size_t n = previous.robots();
  AssignmentOutcome out;
  out.mode = ReassignMode::partial;
  out.assignment = previous;

  if (!new_tasks.empty()) {
    if (modified.size() != n) throw ContractError("one modified matrix per robot is required");
    for (const auto& m : modified)
      if (m.task_count() != new_tasks.size())
        throw ContractError("modified matrices must cover exactly the new tasks");
    require_reachable(modified, new_tasks);

    BoundState b = bounds;
    std::tie(b.omega, b.upper) = default_bounds(modified, new_tasks.size());
    b.gap_threshold = 0.0;
    if (b.omega <= 0.0) b.omega = b.upper;
    AssignmentOutcome appended = minmax_assign(modified, b);
    out.iterations = appended.iterations;

    for (std::size_t r = 0; r < n; ++r) {
      const auto& added = appended.assignment.sequences[r];
      if (added.empty()) continue;
      auto& seq = out.assignment.sequences[r];
      const bool had_work = !seq.empty();
      for (std::size_t slot : added) seq.push_back(new_tasks[slot]);
      if (had_work) {
        CostMatrix m = plain(r, seq);
        std::vector<std::size_t> slots(seq.size());
        for (std::size_t s = 0; s < slots.size(); ++s) slots[s] = s;
        std::vector<std::size_t> reordered;
        for (std::size_t s : single_agent_tsp(m, slots)) reordered.push_back(seq[s]);
        seq = std::move(reordered);
      }
    }
  }

  for (std::size_t r = 0; r < n; ++r) {
    const auto& seq = out.assignment.sequences[r];
    std::vector<std::size_t> slots(seq.size());
    for (std::size_t s = 0; s < slots.size(); ++s) slots[s] = s;
    const double c = plain(r, seq).sequence_cost(slots);
    out.sum_of_costs += c;
    out.makespan = std::max(out.makespan, c);
  }
  return out;
}

BoundDecision check_bound(double partial_makespan, const BoundState& bounds) {
  return partial_makespan > bounds.gamma * bounds.tracked_lower + kEps
             ? BoundDecision::full_reassign
             : BoundDecision::accept;
}

BoundState update_tracked_lower(BoundState bounds, double elapsed) {
  if (elapsed < 0.0) throw ContractError("elapsed time must be non-negative");
  bounds.tracked_lower = std::max(0.0, bounds.tracked_lower - elapsed);
  return bounds;
}

}  // namespace taskplan
