#include "mtsp_solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "taskplan/errors.hpp"

namespace taskplan::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCapSlack = 1e-9;

void check_size(std::size_t k) {
  if (k > kMaxExactTasks)
    throw ContractError("exact solver supports at most " + std::to_string(kMaxExactTasks) +
                        " tasks, got " + std::to_string(k));
}

// dp[S * k + j]: cheapest open path from index 0 covering S, ending at j.
std::vector<double> held_karp(const CostMatrix& m, std::span<const std::size_t> slots,
                              std::vector<std::uint8_t>* parent) {
  const std::size_t k = slots.size();
  const std::uint32_t full = (1u << k) - 1;
  std::vector<double> dp((static_cast<std::size_t>(full) + 1) * k, kInf);
  if (parent) parent->assign(dp.size(), 0xff);
  for (std::size_t j = 0; j < k; ++j) dp[(1u << j) * k + j] = m.at(0, slots[j] + 1);

  for (std::uint32_t s = 1; s <= full; ++s) {
    if (std::has_single_bit(s)) continue;
    for (std::uint32_t rest = s; rest; rest &= rest - 1) {
      const auto j = static_cast<std::size_t>(std::countr_zero(rest));
      const std::uint32_t prev = s & ~(1u << j);
      double best = kInf;
      std::uint8_t arg = 0xff;
      for (std::uint32_t from = prev; from; from &= from - 1) {
        const auto i = static_cast<std::size_t>(std::countr_zero(from));
        const double v = dp[prev * k + i] + m.at(slots[i] + 1, slots[j] + 1);
        if (v < best) {
          best = v;
          arg = static_cast<std::uint8_t>(i);
        }
      }
      dp[s * k + j] = best;
      if (parent) (*parent)[s * k + j] = arg;
    }
  }
  return dp;
}

}  // namespace

std::vector<double> subset_tour_costs(const CostMatrix& m, std::span<const std::size_t> slots) {
  const std::size_t k = slots.size();
  check_size(k);
  const std::uint32_t full = (1u << k) - 1;
  std::vector<double> out(static_cast<std::size_t>(full) + 1, kInf);
  out[0] = m.base_cost();
  if (k == 0) return out;
  auto dp = held_karp(m, slots, nullptr);
  for (std::uint32_t s = 1; s <= full; ++s)
    for (std::size_t j = 0; j < k; ++j) out[s] = std::min(out[s], dp[s * k + j]);
  return out;
}

std::vector<std::size_t> best_order(const CostMatrix& m, std::span<const std::size_t> slots) {
  const std::size_t k = slots.size();
  check_size(k);
  if (k <= 1) return {slots.begin(), slots.end()};
  std::vector<std::uint8_t> parent;
  auto dp = held_karp(m, slots, &parent);
  const std::uint32_t full = (1u << k) - 1;
  std::size_t end = 0;
  for (std::size_t j = 1; j < k; ++j)
    if (dp[full * k + j] < dp[full * k + end]) end = j;
  if (!std::isfinite(dp[full * k + end])) throw ContractError("tasks are not mutually reachable");

  std::vector<std::size_t> order;
  std::uint32_t s = full;
  std::size_t j = end;
  while (true) {
    order.push_back(slots[j]);
    const std::uint8_t p = parent[s * k + j];
    s &= ~(1u << j);
    if (s == 0) break;
    j = p;
  }
  std::reverse(order.begin(), order.end());
  return order;
}

MtspSolver::MtspSolver(std::span<const CostMatrix> matrices) {
  if (matrices.empty()) throw ContractError("at least one cost matrix is required");
  tasks_ = matrices.front().task_count();
  for (const auto& m : matrices) {
    if (m.task_count() != tasks_)
      throw ContractError("cost matrices disagree on the number of tasks");
    integral_ = integral_ && m.all_integral();
  }
  check_size(tasks_);
  std::vector<std::size_t> slots(tasks_);
  for (std::size_t s = 0; s < tasks_; ++s) slots[s] = s;
  tables_.reserve(matrices.size());
  for (const auto& m : matrices) tables_.push_back(subset_tour_costs(m, slots));
}

std::optional<Partition> MtspSolver::solve(std::optional<double> cap) const {
  const std::size_t n = tables_.size();
  const std::uint32_t full = (1u << tasks_) - 1;
  const std::size_t states = static_cast<std::size_t>(full) + 1;
  const double limit = cap ? *cap + kCapSlack : kInf;
  auto fits = [&](double v) { return std::isfinite(v) && v <= limit; };

  // choice[r][S]: subset given to robot r when robots 0..r jointly cover S.
  // Equal sums keep the numerically largest subset for the lower-index
  // robot, so ties lean towards earlier robots.
  std::vector<std::vector<std::uint32_t>> choice(n);
  std::vector<double> cover(states, kInf), next(states, kInf);
  cover[0] = 0.0;

  for (std::size_t r = 0; r + 1 < n; ++r) {
    const auto& table = tables_[r];
    std::vector<std::uint32_t> feasible;
    for (std::uint32_t t = 0; t <= full; ++t)
      if (fits(table[t])) feasible.push_back(t);
    std::fill(next.begin(), next.end(), kInf);
    auto& pick = choice[r];
    pick.assign(states, 0);
    for (std::uint32_t s = 0; s <= full; ++s) {
      const double base = cover[s];
      if (!std::isfinite(base)) continue;
      const std::uint32_t comp = full & ~s;
      auto relax = [&](std::uint32_t t) {
        if (!fits(table[t])) return;
        const double v = base + table[t];
        if (v <= next[s | t]) {
          next[s | t] = v;
          pick[s | t] = t;
        }
      };
      const std::size_t submasks = std::size_t{1} << std::popcount(comp);
      if (submasks <= feasible.size()) {
        // Enumerate submasks of the complement, ascending.
        std::uint32_t t = 0;
        do {
          relax(t);
          t = (t - comp) & comp;
        } while (t != 0);
      } else {
        for (std::uint32_t t : feasible)
          if ((t & s) == 0) relax(t);
      }
    }
    std::swap(cover, next);
  }

  // The last robot takes whatever is left.
  const auto& last = tables_[n - 1];
  double best = kInf;
  std::uint32_t best_s = 0;
  for (std::uint32_t s = 0; s <= full; ++s) {
    if (!std::isfinite(cover[s])) continue;
    const double tail = last[full & ~s];
    if (!fits(tail)) continue;
    if (cover[s] + tail <= best) {
      best = cover[s] + tail;
      best_s = s;
    }
  }
  if (!std::isfinite(best)) return std::nullopt;

  Partition out;
  out.subsets.assign(n, 0);
  out.subsets[n - 1] = full & ~best_s;
  std::uint32_t s = best_s;
  for (std::size_t r = n - 1; r-- > 0;) {
    const std::uint32_t t = choice[r][s];
    out.subsets[r] = t;
    s &= ~t;
  }
  out.sum_of_costs = 0.0;
  out.makespan = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double c = tables_[r][out.subsets[r]];
    out.sum_of_costs += c;
    out.makespan = std::max(out.makespan, c);
  }
  return out;
}

}  // namespace taskplan::detail
