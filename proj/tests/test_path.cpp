#include <gtest/gtest.h>

#include "taskplan/errors.hpp"
#include "taskplan/path.hpp"

using namespace taskplan;

namespace {

Path make(std::initializer_list<Cell> cells, double t0 = 0.0) {
  Path p;
  double t = t0;
  for (Cell c : cells) p.entries.push_back({c, t++});
  return p;
}

}  // namespace

TEST(Path, ConcatenateRetimesTail) {
  Path a = make({{0, 0}, {1, 0}});
  Path b = make({{1, 0}, {2, 0}, {2, 1}});
  Path c = concatenate(a, b);
  EXPECT_EQ(c, make({{0, 0}, {1, 0}, {2, 0}, {2, 1}}));
}

TEST(Path, ConcatenateNeedsSharedEndpoint) {
  EXPECT_THROW(concatenate(make({{0, 0}}), make({{1, 0}})), InvalidPathError);
}

TEST(Path, SplitKeepsSplitEntryInBothHalves) {
  Path p = make({{0, 0}, {1, 0}, {2, 0}});
  auto [head, tail] = split(p, 1);
  EXPECT_EQ(head.size(), 2u);
  EXPECT_EQ(tail.size(), 2u);
  EXPECT_EQ(head.back(), tail.front());
  EXPECT_EQ(concatenate(head, tail), p);
  EXPECT_THROW(split(p, 3), std::out_of_range);
}

TEST(Path, CellAtHoldsLastVertex) {
  Path p = make({{0, 0}, {1, 0}});
  EXPECT_EQ(cell_at(p, 0), (Cell{0, 0}));
  EXPECT_EQ(cell_at(p, 1), (Cell{1, 0}));
  EXPECT_EQ(cell_at(p, 9), (Cell{1, 0}));
  EXPECT_THROW(cell_at(Path{}, 0), InvalidPathError);
}
