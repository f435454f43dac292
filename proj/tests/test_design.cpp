#include "isocdf/design.hpp"

#include <gtest/gtest.h>

#include <vector>

#include "isocdf/random.hpp"

namespace {

using isocdf::DesignGroups;
using isocdf::group_by_design;
using isocdf::Observation;
using isocdf::QuantileSide;
using isocdf::StepCdf;

TEST(GroupByDesign, GroupsAndSortsResponses) {
  const std::vector<Observation> obs{{1, 5}, {1, 3}, {2, 4}};
  const DesignGroups g = group_by_design(obs);
  ASSERT_EQ(g.num_groups(), 2u);
  EXPECT_EQ(g.xs(), (std::vector<double>{1, 2}));
  EXPECT_EQ(g.weights(), (std::vector<std::int64_t>{2, 1}));
  EXPECT_EQ(g.responses(0), (std::vector<double>{3, 5}));
  EXPECT_EQ(g.responses(1), (std::vector<double>{4}));
  EXPECT_EQ(g.total_count(), 3);
}

TEST(GroupByDesign, Singleton) {
  const DesignGroups g = group_by_design(std::vector<Observation>{{0, 7}});
  EXPECT_EQ(g.xs(), (std::vector<double>{0}));
  EXPECT_EQ(g.weights(), (std::vector<std::int64_t>{1}));
  EXPECT_EQ(g.responses(0), (std::vector<double>{7}));
}

TEST(GroupByDesign, TwoPointCounterexampleData) {
  // x1 < x2 with y1 > y2
  const DesignGroups g = group_by_design(std::vector<Observation>{{0, 1}, {1, 0}});
  EXPECT_EQ(g.xs(), (std::vector<double>{0, 1}));
  EXPECT_EQ(g.weights(), (std::vector<std::int64_t>{1, 1}));
  EXPECT_EQ(g.responses(0), (std::vector<double>{1}));
  EXPECT_EQ(g.responses(1), (std::vector<double>{0}));
}

TEST(GroupByDesign, Errors) {
  EXPECT_THROW(group_by_design(std::vector<Observation>{}), std::invalid_argument);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(group_by_design(std::vector<Observation>{{0, inf}}),
               std::invalid_argument);
  EXPECT_THROW(group_by_design(std::vector<Observation>{{NAN, 1}}),
               std::invalid_argument);
}

TEST(EmpiricalCdf, PerGroupJumps) {
  const DesignGroups g = group_by_design(
      std::vector<Observation>{{1, 5}, {1, 3}, {2, 7}, {3, 2}, {3, 2}, {3, 4}});
  const StepCdf f0 = g.empirical_cdf(0);
  EXPECT_DOUBLE_EQ(f0(3.0), 0.5);
  EXPECT_DOUBLE_EQ(f0(5.0), 1.0);
  const StepCdf f1 = g.empirical_cdf(1);
  EXPECT_DOUBLE_EQ(f1(7.0), 1.0);
  const StepCdf f2 = g.empirical_cdf(2);
  EXPECT_DOUBLE_EQ(f2(2.0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(f2(4.0), 1.0);
  EXPECT_THROW(g.empirical_cdf(3), std::out_of_range);
}

TEST(PooledCdf, TwoPointCounterexample) {
  const DesignGroups g = group_by_design(std::vector<Observation>{{0, 1}, {1, 0}});
  const StepCdf pooled = g.pooled_cdf(0, 1);
  EXPECT_DOUBLE_EQ(pooled(0.0), 0.5);
  EXPECT_DOUBLE_EQ(pooled(0.5), 0.5);
  EXPECT_DOUBLE_EQ(pooled(1.0), 1.0);
  EXPECT_EQ(pooled.quantile(0.5, QuantileSide::minimal), 0.0);  // = y2
  EXPECT_EQ(pooled.quantile(0.5, QuantileSide::maximal), 1.0);  // = y1
}

TEST(PooledCdf, SingleGroupEqualsEmpirical) {
  const DesignGroups g = group_by_design(
      std::vector<Observation>{{1, 5}, {1, 3}, {2, 7}, {3, 2}});
  for (std::size_t j = 0; j < g.num_groups(); ++j) {
    const StepCdf a = g.pooled_cdf(j, j);
    const StepCdf b = g.empirical_cdf(j);
    EXPECT_EQ(a.jump_points(), b.jump_points());
    EXPECT_EQ(a.cumulative_counts(), b.cumulative_counts());
  }
}

TEST(PooledCdf, MidpointValue) {
  const DesignGroups g = group_by_design(std::vector<Observation>{{0, 1}, {1, 3}});
  EXPECT_DOUBLE_EQ(g.pooled_cdf(0, 1)(2.0), 0.5);
  EXPECT_THROW(g.pooled_cdf(1, 0), std::out_of_range);
  EXPECT_THROW(g.pooled_cdf(0, 2), std::out_of_range);
}

// The pooled CDF must coincide with the weighted average of the per-group
// CDFs (the construction goes through the merged sample instead, so this is
// a genuine cross-check of the two routes).
TEST(PooledCdf, MatchesWeightedAverageOfGroupCdfs) {
  isocdf::CounterRng rng(77001);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 14);
    std::vector<Observation> obs(n);
    for (auto& o : obs) {
      o.x = std::floor(rng.uniform() * 4.0);
      o.y = std::floor(rng.uniform() * 6.0) * 0.5;
    }
    const DesignGroups g = group_by_design(obs);
    const std::size_t m = g.num_groups();
    const std::size_t r = rng.next_u64() % m;
    const std::size_t s = r + rng.next_u64() % (m - r);
    const StepCdf pooled = g.pooled_cdf(r, s);

    const double wrs = static_cast<double>(g.pooled_weight(r, s));
    for (double y : pooled.jump_points()) {
      double avg = 0.0;
      for (std::size_t j = r; j <= s; ++j)
        avg += static_cast<double>(g.weights()[j]) * g.empirical_cdf(j)(y);
      avg /= wrs;
      EXPECT_NEAR(pooled(y), avg, 1e-12);
    }
  }
}

}  // namespace
