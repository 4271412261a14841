#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "taskplan/assignment.hpp"
#include "taskplan/env.hpp"
#include "taskplan/errors.hpp"

using namespace taskplan;

namespace {

BoundState bounds_for(const std::vector<CostMatrix>& ms, double mu = 1.05) {
  BoundState b;
  std::tie(b.omega, b.upper) = default_bounds(ms, ms.front().task_count());
  b.mu = mu;
  if (b.omega <= 0.0) b.gap_threshold = 0.5;
  return b;
}

bool conserves_tasks(const Assignment& a, std::size_t m) {
  std::vector<int> seen(m, 0);
  for (const auto& s : a.sequences)
    for (std::size_t t : s) {
      if (t >= m) return false;
      ++seen[t];
    }
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

// Open 4x4 grid with two robots and two tasks.
struct GateExample {
  std::shared_ptr<const GridMap> map = std::make_shared<const GridMap>(4, 4);
  std::vector<RobotProfile> robots;
  GateExample() {
    auto g = std::make_shared<const GridGraph>(map);
    robots = {RobotProfile{0, {3, 3}, 1.0, 0.5, g}, RobotProfile{1, {3, 1}, 1.0, 0.5, g}};
  }
  std::vector<CostMatrix> matrices(const std::vector<Task>& tasks) const {
    std::vector<CostMatrix> out;
    for (const auto& r : robots) out.push_back(build_cost_matrix(r, tasks));
    return out;
  }
};

}  // namespace

TEST(Assignment, MinmaxMatchesExhaustiveOptimum) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 150; ++i) {
    const std::size_t n = 2 + i % 2, m = 2 + i % 5;
    auto ms = oracle::random_matrices(n, m, rng);
    BoundState b = bounds_for(ms);
    b.gap_threshold = 0.5;  // below the unit cost gap
    auto out = minmax_assign(ms, b);
    auto ref = oracle::minmax(ms);
    EXPECT_DOUBLE_EQ(out.makespan, ref.makespan);
    EXPECT_DOUBLE_EQ(out.sum_of_costs, ref.sum_at_makespan);
    EXPECT_DOUBLE_EQ(out.lower_bound, ref.makespan);
    EXPECT_TRUE(conserves_tasks(out.assignment, m));
    EXPECT_DOUBLE_EQ(assignment_makespan(out.assignment, ms), out.makespan);
  }
}

TEST(Assignment, BoundedSuboptimality) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 150; ++i) {
    auto ms = oracle::random_matrices(2 + i % 2, 2 + i % 5, rng, 30);
    auto out = minmax_assign(ms, bounds_for(ms, 1.5));
    auto ref = oracle::minmax(ms);
    EXPECT_LE(out.makespan, 1.5 * ref.makespan + 1e-9);
    EXPECT_LE(out.lower_bound, ref.makespan + 1e-9);
  }
}

TEST(Assignment, LowerBoundCertifiedWithFractionalCosts) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.5, 9.5);
  for (int i = 0; i < 60; ++i) {
    auto ms = oracle::random_matrices(2, 4, rng);
    for (auto& m : ms)
      for (std::size_t j = 0; j < m.dim(); ++j)
        for (std::size_t k = 1; k < m.dim(); ++k)
          if (j != k) m.at(j, k) = u(rng);
    auto out = minmax_assign(ms, bounds_for(ms, 1.2));
    auto ref = oracle::minmax(ms);
    EXPECT_LE(out.lower_bound, ref.makespan + 1e-9);
    EXPECT_LE(out.makespan, 1.2 * ref.makespan + 1e-9);
  }
}

TEST(Assignment, SumOfCostsMatchesOracle) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 80; ++i) {
    auto ms = oracle::random_matrices(2 + i % 2, 1 + i % 6, rng);
    auto a = sum_of_costs_mtsp(ms);
    ASSERT_TRUE(a.has_value());
    double sum = 0;
    for (std::size_t r = 0; r < ms.size(); ++r) sum += ms[r].sequence_cost(a->sequences[r]);
    EXPECT_DOUBLE_EQ(sum, oracle::minmax(ms).min_sum);
  }
}

TEST(Assignment, CapCanBeInfeasible) {
  std::mt19937_64 rng(1);
  auto ms = oracle::random_matrices(2, 3, rng);
  EXPECT_FALSE(sum_of_costs_mtsp(ms, 0.5).has_value());
  EXPECT_THROW(sum_of_costs_mtsp(ms, -1.0), ContractError);
}

TEST(Assignment, DefaultBoundsBracketOptimum) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 100; ++i) {
    auto ms = oracle::random_matrices(2 + i % 2, 1 + i % 6, rng);
    auto [lo, hi] = default_bounds(ms, ms.front().task_count());
    const double opt = oracle::minmax(ms).makespan;
    EXPECT_LE(lo, opt + 1e-9);
    EXPECT_GE(hi, opt - 1e-9);
  }
}

TEST(Assignment, DefaultBoundsRejectUnreachableTask) {
  std::mt19937_64 rng(2);
  auto ms = oracle::random_matrices(2, 2, rng);
  for (auto& m : ms) m.at(0, 2) = kInfeasibleCost;
  try {
    default_bounds(ms, 2);
    FAIL();
  } catch (const InfeasibleTaskError& e) {
    EXPECT_EQ(e.task(), 1u);
  }
}

TEST(Assignment, ZeroTasks) {
  std::vector<CostMatrix> ms{CostMatrix(0, 0), CostMatrix(1, 0, 4.0)};
  auto [lo, hi] = default_bounds(ms, 0);
  EXPECT_EQ(lo, 0.0);
  EXPECT_EQ(hi, 4.0);
  BoundState b;
  auto out = minmax_assign(ms, b);
  EXPECT_EQ(out.assignment.task_count(), 0u);
  EXPECT_EQ(out.makespan, 4.0);
}

TEST(Assignment, NonPositiveGapIsAContractError) {
  std::mt19937_64 rng(3);
  auto ms = oracle::random_matrices(2, 2, rng);
  BoundState b = bounds_for(ms);
  b.omega = 0.0;
  b.gap_threshold = 0.0;
  EXPECT_THROW(minmax_assign(ms, b), ContractError);
}

TEST(Assignment, SingleAgentTspMatchesPermutations) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 50; ++i) {
    auto ms = oracle::random_matrices(1, 1 + i % 7, rng);
    std::vector<std::size_t> slots(ms[0].task_count());
    std::iota(slots.begin(), slots.end(), 0);
    auto order = single_agent_tsp(ms[0], slots);
    EXPECT_DOUBLE_EQ(ms[0].sequence_cost(order), oracle::best_order_cost(ms[0], slots));
  }
}

TEST(Assignment, GateAndTrackedBound) {
  BoundState b;
  b.gamma = 1.5;
  b.tracked_lower = 3.0;
  EXPECT_EQ(check_bound(4.5, b), BoundDecision::accept);
  EXPECT_EQ(check_bound(4.6, b), BoundDecision::full_reassign);
  EXPECT_EQ(update_tracked_lower(b, 2.0).tracked_lower, 1.0);
  EXPECT_EQ(update_tracked_lower(b, 5.0).tracked_lower, 0.0);
  EXPECT_THROW(update_tracked_lower(b, -1.0), ContractError);
  b.tracked_lower = 0.0;
  EXPECT_EQ(check_bound(0.0, b), BoundDecision::accept);
  EXPECT_EQ(check_bound(1.0, b), BoundDecision::full_reassign);
}

TEST(Assignment, GateExampleInitialOptimum) {
  GateExample f;
  std::vector<Task> tasks{{0, {0, 1}, 0}, {1, {0, 3}, 0}};
  auto ms = f.matrices(tasks);
  auto [lo, hi] = default_bounds(ms, 2);
  EXPECT_EQ(lo, 2.0);
  EXPECT_EQ(hi, 5.0);
  BoundState b;
  b.omega = lo;
  b.upper = hi;
  auto out = minmax_assign(ms, b);
  EXPECT_EQ(out.makespan, 3.0);
  EXPECT_EQ(out.lower_bound, 3.0);
  EXPECT_EQ(out.assignment.sequences[0], std::vector<std::size_t>{1});
  EXPECT_EQ(out.assignment.sequences[1], std::vector<std::size_t>{0});
}

TEST(Assignment, GateExamplePartialScenarios) {
  GateExample f;
  std::vector<Task> all{{0, {0, 1}, 0}, {1, {0, 3}, 0}, {2, {1, 3}, 0}, {3, {2, 0}, 0}};
  Assignment prev(2);
  prev.sequences = {{1}, {0}};
  MatrixBuilder plain = [&](std::size_t r, std::span<const std::size_t> ids) {
    std::vector<Task> ts;
    for (std::size_t id : ids) ts.push_back(all[id]);
    return build_cost_matrix(f.robots[r], ts);
  };
  BoundState b;
  b.gamma = 1.5;
  b.tracked_lower = 3.0;

  auto partial = [&](std::size_t id) {
    std::vector<Task> fresh{all[id]};
    std::vector<CostMatrix> modified;
    for (std::size_t r = 0; r < 2; ++r) {
      const Task& last = all[prev.sequences[r].back()];
      const double carried = build_cost_matrix(f.robots[r], std::vector<Task>{last}).at(0, 1);
      modified.push_back(build_cost_matrix(f.robots[r], fresh, CarriedWork{last.location, carried}));
    }
    const std::vector<std::size_t> ids{id};
    return partial_reassign(prev, ids, modified, b, plain);
  };

  auto s1 = partial(2);
  EXPECT_EQ(s1.makespan, 3.0);
  EXPECT_EQ(s1.assignment.sequences[0], (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(s1.assignment.sequences[1], std::vector<std::size_t>{0});
  EXPECT_EQ(check_bound(s1.makespan, b), BoundDecision::accept);

  auto s2 = partial(3);
  EXPECT_EQ(s2.makespan, 5.0);
  EXPECT_EQ(s2.assignment.sequences[1], (std::vector<std::size_t>{3, 0}));
  EXPECT_EQ(check_bound(s2.makespan, b), BoundDecision::full_reassign);

  std::vector<Task> three{all[0], all[1], all[3]};
  auto ms = f.matrices(three);
  BoundState full;
  full.omega = 3.0;
  full.upper = 5.0;
  auto out = minmax_assign(ms, full);
  EXPECT_EQ(out.makespan, 5.0);
  EXPECT_EQ(out.lower_bound, 5.0);
  EXPECT_EQ(out.sum_of_costs, 7.0);
  EXPECT_EQ(out.assignment.sequences[0], (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(out.assignment.sequences[1], std::vector<std::size_t>{2});
}

TEST(Assignment, PartialKeepsExistingAllocation) {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 40; ++i) {
    // 3 old tasks spread over 2 robots, 2 new tasks.
    auto base = oracle::random_matrices(2, 5, rng);
    Assignment prev(2);
    prev.sequences = {{0, 1}, {2}};
    std::vector<std::size_t> fresh{3, 4};
    std::vector<CostMatrix> modified;
    for (std::size_t r = 0; r < 2; ++r) {
      const auto& seq = prev.sequences[r];
      const double carried = base[r].sequence_cost(seq);
      CostMatrix m(r, 2, carried);
      for (std::size_t j = 0; j <= 2; ++j)
        for (std::size_t k = 1; k <= 2; ++k) {
          const std::size_t from = j == 0 ? seq.back() + 1 : fresh[j - 1] + 1;
          m.at(j, k) = j == k ? 0.0 : base[r].at(from, fresh[k - 1] + 1) + (j == 0 ? carried : 0);
        }
      modified.push_back(m);
    }
    MatrixBuilder plain = [&](std::size_t r, std::span<const std::size_t> ids) {
      CostMatrix m(r, ids.size());
      for (std::size_t j = 0; j <= ids.size(); ++j)
        for (std::size_t k = 1; k <= ids.size(); ++k)
          m.at(j, k) = base[r].at(j == 0 ? 0 : ids[j - 1] + 1, ids[k - 1] + 1);
      return m;
    };
    BoundState b;
    auto out = partial_reassign(prev, fresh, modified, b, plain);
    EXPECT_EQ(out.mode, ReassignMode::partial);
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t t : prev.sequences[r])
        EXPECT_NE(std::find(out.assignment.sequences[r].begin(), out.assignment.sequences[r].end(), t),
                  out.assignment.sequences[r].end());
    EXPECT_TRUE(conserves_tasks(out.assignment, 5));
    EXPECT_DOUBLE_EQ(out.makespan, assignment_makespan(out.assignment, base));
  }
}

TEST(Assignment, PartialWithNoNewTasksKeepsEverything) {
  std::mt19937_64 rng(4);
  auto base = oracle::random_matrices(2, 2, rng);
  Assignment prev(2);
  prev.sequences = {{0}, {1}};
  MatrixBuilder plain = [&](std::size_t r, std::span<const std::size_t> ids) {
    CostMatrix m(r, ids.size());
    for (std::size_t j = 0; j <= ids.size(); ++j)
      for (std::size_t k = 1; k <= ids.size(); ++k)
        m.at(j, k) = base[r].at(j == 0 ? 0 : ids[j - 1] + 1, ids[k - 1] + 1);
    return m;
  };
  auto out = partial_reassign(prev, {}, {}, BoundState{}, plain);
  EXPECT_EQ(out.assignment, prev);
  EXPECT_DOUBLE_EQ(out.makespan, assignment_makespan(prev, base));
}
