#include "isocdf/isotonic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "isocdf/brute_force.hpp"
#include "isocdf/design.hpp"
#include "isocdf/quantile_fit.hpp"
#include "isocdf/random.hpp"

namespace {

using isocdf::brute_force_band;
using isocdf::check_membership;
using isocdf::CounterRng;
using isocdf::DesignGroups;
using isocdf::ExplicitLoss;
using isocdf::minmax_band;
using isocdf::Observation;
using isocdf::pava_antitonic_ls;
using isocdf::pava_isotonic_ls;
using isocdf::PinballOracle;
using isocdf::SolutionBand;
using isocdf::SquaredLossOracle;

// ----- reference implementations used as oracles ---------------------------

// Least-squares minimizer over non-increasing vectors by enumerating all
// 2^(m-1) partitions into consecutive blocks.  Candidates are blockwise
// weighted means; infeasible (non-monotone) candidates are discarded.
std::vector<double> antitonic_ls_by_partitions(const std::vector<double>& t,
                                               const std::vector<double>& w) {
  const std::size_t m = t.size();
  std::vector<double> best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 0; mask < (std::size_t{1} << (m - 1)); ++mask) {
    std::vector<double> fit(m);
    std::size_t begin = 0;
    bool feasible = true;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      const bool boundary = (j + 1 == m) || ((mask >> j) & 1u);
      if (!boundary) continue;
      double ws = 0.0, s = 0.0;
      for (std::size_t i = begin; i <= j; ++i) {
        s += w[i] * t[i];
        ws += w[i];
      }
      const double mean = s / ws;
      if (mean > prev) {
        feasible = false;
        break;
      }
      for (std::size_t i = begin; i <= j; ++i) fit[i] = mean;
      prev = mean;
      begin = j + 1;
    }
    if (!feasible) continue;
    double sse = 0.0;
    for (std::size_t j = 0; j < m; ++j) sse += w[j] * (t[j] - fit[j]) * (t[j] - fit[j]);
    if (sse < best_sse) {
      best_sse = sse;
      best = fit;
    }
  }
  return best;
}

// Direct min-max formula for antitonic least squares:
// fit_j = min_{r<=j} max_{s>=j} weighted-mean(t, w; r..s).
std::vector<double> antitonic_ls_by_minmax(const std::vector<double>& t,
                                           const std::vector<double>& w) {
  const std::size_t m = t.size();
  auto mean = [&](std::size_t r, std::size_t s) {
    double ws = 0.0, sum = 0.0;
    for (std::size_t i = r; i <= s; ++i) {
      sum += w[i] * t[i];
      ws += w[i];
    }
    return sum / ws;
  };
  std::vector<double> fit(m);
  for (std::size_t j = 0; j < m; ++j) {
    double outer = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r <= j; ++r) {
      double inner = -std::numeric_limits<double>::infinity();
      for (std::size_t s = j; s < m; ++s) inner = std::max(inner, mean(r, s));
      outer = std::min(outer, inner);
    }
    fit[j] = outer;
  }
  return fit;
}

std::vector<double> random_targets(CounterRng& rng, std::size_t m) {
  std::vector<double> t(m);
  for (double& v : t) v = rng.uniform();
  return t;
}

std::vector<double> random_int_weights(CounterRng& rng, std::size_t m, int maxw) {
  std::vector<double> w(m);
  for (double& v : w) v = 1.0 + static_cast<double>(rng.next_u64() % maxw);
  return w;
}

DesignGroups random_groups(CounterRng& rng, std::size_t max_m, std::size_t max_n) {
  const std::size_t m = 1 + rng.next_u64() % max_m;
  const std::size_t n = std::max(m, 1 + rng.next_u64() % max_n);
  std::vector<Observation> obs(n);
  for (std::size_t i = 0; i < n; ++i) {
    obs[i].x = static_cast<double>(i % m);
    obs[i].y = std::floor(rng.uniform() * 10.0) * 0.5;
  }
  return isocdf::group_by_design(obs);
}

// ----- PAVA -----------------------------------------------------------------

TEST(Pava, FeasibleInputIsItsOwnProjection) {
  const std::vector<double> t{5.0, 4.0, 4.0, 1.5};
  const std::vector<double> w{1.0, 2.0, 1.0, 3.0};
  EXPECT_EQ(pava_antitonic_ls(t, w), t);
  const std::vector<double> inc{1.0, 2.0, 2.0, 7.0};
  EXPECT_EQ(pava_isotonic_ls(inc, w), inc);
}

TEST(Pava, TwoPointPooling) {
  const std::vector<double> t{0.0, 1.0};
  const std::vector<double> w{1.0, 1.0};
  const auto fit = pava_antitonic_ls(t, w);
  EXPECT_DOUBLE_EQ(fit[0], 0.5);
  EXPECT_DOUBLE_EQ(fit[1], 0.5);
}

TEST(Pava, WeightedThreePointExample) {
  // targets (0.2, 0.9, 0.1), weights (1, 2, 1): pooling the first two blocks
  // gives (2/3, 2/3, 0.1), which the partition oracle confirms is optimal.
  const std::vector<double> t{0.2, 0.9, 0.1};
  const std::vector<double> w{1.0, 2.0, 1.0};
  const auto fit = pava_antitonic_ls(t, w);
  ASSERT_EQ(fit.size(), 3u);
  EXPECT_NEAR(fit[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(fit[1], 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(fit[2], 0.1);
  const auto oracle = antitonic_ls_by_partitions(t, w);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(fit[j], oracle[j], 1e-12);
}

TEST(Pava, Errors) {
  EXPECT_THROW(pava_antitonic_ls(std::vector<double>{1.0},
                                 std::vector<double>{1.0, 2.0}),
               std::invalid_argument);
  EXPECT_THROW(pava_antitonic_ls(std::vector<double>{1.0, 2.0},
                                 std::vector<double>{1.0, 0.0}),
               std::invalid_argument);
}

TEST(Pava, MatchesPartitionOracleAndMinMaxFormula) {
  CounterRng rng(90210);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 1 + rng.next_u64() % 8;
    const auto t = random_targets(rng, m);
    const auto w = random_int_weights(rng, m, 5);
    const auto fit = pava_antitonic_ls(t, w);
    const auto by_partitions = antitonic_ls_by_partitions(t, w);
    const auto by_minmax = antitonic_ls_by_minmax(t, w);
    for (std::size_t j = 0; j < m; ++j) {
      EXPECT_NEAR(fit[j], by_partitions[j], 1e-12);
      EXPECT_NEAR(fit[j], by_minmax[j], 1e-12);
    }
  }
}

TEST(Pava, MinMaxFormulaAtLargerSizes) {
  CounterRng rng(31337);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t m = 10 + rng.next_u64() % 21;  // up to 30
    const auto t = random_targets(rng, m);
    const auto w = random_int_weights(rng, m, 4);
    const auto fit = pava_antitonic_ls(t, w);
    const auto direct = antitonic_ls_by_minmax(t, w);
    for (std::size_t j = 0; j < m; ++j) EXPECT_NEAR(fit[j], direct[j], 1e-12);
  }
}

// ----- min-max band over loss oracles ---------------------------------------

TEST(MinmaxBand, SingleIndexIsTheMinimizerInterval) {
  const DesignGroups g = isocdf::group_by_design(
      std::vector<Observation>{{0, 1}, {0, 2}, {0, 5}, {0, 9}});
  const PinballOracle oracle(g, 0.5);
  const SolutionBand band = minmax_band(oracle);
  const auto [lo, hi] = oracle.interval_minimizers(0, 0);
  ASSERT_EQ(band.lower.size(), 1u);
  EXPECT_EQ(band.lower[0], lo);
  EXPECT_EQ(band.upper[0], hi);
  EXPECT_EQ(lo, 2.0);
  EXPECT_EQ(hi, 5.0);
}

TEST(MinmaxBand, TwoPointCounterexample) {
  const DesignGroups g = isocdf::group_by_design(
      std::vector<Observation>{{0, 1}, {1, 0}});
  const SolutionBand band = minmax_band(PinballOracle(g, 0.5));
  EXPECT_EQ(band.lower, (std::vector<double>{0, 0}));
  EXPECT_EQ(band.upper, (std::vector<double>{1, 1}));
}

TEST(MinmaxBand, SquaredLossCollapsesToPavaFit) {
  CounterRng rng(5150);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t m = 1 + rng.next_u64() % 7;
    const auto t = random_targets(rng, m);
    const auto w = random_int_weights(rng, m, 3);
    const SolutionBand band = minmax_band(SquaredLossOracle(t, w));
    const auto fit = pava_isotonic_ls(t, w);
    for (std::size_t j = 0; j < m; ++j) {
      EXPECT_NEAR(band.lower[j], fit[j], 1e-12);
      EXPECT_NEAR(band.upper[j], fit[j], 1e-12);
    }
    EXPECT_TRUE(check_membership(SquaredLossOracle(t, w), fit, 1e-12));
  }
}

TEST(CheckMembership, TwoPointCounterexample) {
  const DesignGroups g = isocdf::group_by_design(
      std::vector<Observation>{{0, 1}, {1, 0}});
  const PinballOracle oracle(g, 0.5);
  for (double q : {0.0, 0.25, 0.5, 1.0}) {
    EXPECT_TRUE(check_membership(oracle, std::vector<double>{q, q}));
  }
  // strictly increasing through the band is not a minimizer
  EXPECT_FALSE(check_membership(oracle, std::vector<double>{0.0, 1.0}));
  // decreasing vectors are rejected outright
  EXPECT_FALSE(check_membership(oracle, std::vector<double>{1.0, 0.0}));
}

TEST(CheckMembership, AgreesWithGridBruteForceOnPinballInstances) {
  CounterRng rng(468101214);
  for (int rep = 0; rep < 60; ++rep) {
    const DesignGroups g = random_groups(rng, 3, 6);
    const std::size_t m = g.num_groups();
    const double beta = 0.25 + 0.5 * rng.uniform();
    const PinballOracle oracle(g, beta);

    std::vector<ExplicitLoss> losses(m);
    for (std::size_t j = 0; j < m; ++j)
      for (double y : g.responses(j)) losses[j].pinball.push_back({beta, y});
    const std::vector<double> grid = g.distinct_responses();

    // enumerate every non-decreasing grid vector and compare verdicts with
    // the direct total-loss minimum
    const auto bf = brute_force_band(losses, grid, 5'000'000, true);
    std::vector<std::size_t> idx(m, 0);
    std::vector<double> q(m);
    for (;;) {
      double v = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        q[j] = grid[idx[j]];
        v += losses[j](q[j]);
      }
      const bool is_min = v <= bf.min_value + 1e-10 * std::max(1.0, bf.min_value);
      EXPECT_EQ(check_membership(oracle, q), is_min);
      std::size_t j = m;
      bool done = false;
      for (;;) {
        if (j == 0) {
          done = true;
          break;
        }
        --j;
        if (idx[j] + 1 < grid.size()) {
          const std::size_t v0 = idx[j] + 1;
          for (std::size_t t = j; t < m; ++t) idx[t] = v0;
          break;
        }
      }
      if (done) break;
    }
  }
}

// ----- properties of the convex-loss machinery ------------------------------

TEST(LossOracleProperties, CauchyMeanValueUnderPartitions) {
  CounterRng rng(222);
  for (int rep = 0; rep < 200; ++rep) {
    const DesignGroups g = random_groups(rng, 6, 14);
    const std::size_t m = g.num_groups();
    const double beta = 0.1 + 0.8 * rng.uniform();
    const PinballOracle pin(g, beta);

    std::vector<double> t = random_targets(rng, m);
    std::vector<double> w = random_int_weights(rng, m, 4);
    const SquaredLossOracle sq(t, w);

    const std::size_t a = rng.next_u64() % m;
    const std::size_t b = a + rng.next_u64() % (m - a);
    // random partition of [a, b] into consecutive intervals
    std::vector<std::size_t> cuts{a};
    for (std::size_t j = a; j < b; ++j)
      if (rng.uniform() < 0.4) cuts.push_back(j + 1);
    cuts.push_back(b + 1);
    if (cuts.size() < 3) continue;  // need k >= 2 sub-intervals

    auto check = [&](const auto& oracle) {
      const auto [lab, uab] = oracle.interval_minimizers(a, b);
      double lmin = std::numeric_limits<double>::infinity(), lmax = -lmin;
      double umin = lmin, umax = -lmin;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const auto [l, u] = oracle.interval_minimizers(cuts[i], cuts[i + 1] - 1);
        lmin = std::min(lmin, l);
        lmax = std::max(lmax, l);
        umin = std::min(umin, u);
        umax = std::max(umax, u);
      }
      EXPECT_LE(lmin, lab + 1e-12);
      EXPECT_LE(lab, lmax + 1e-12);
      EXPECT_LE(umin, uab + 1e-12);
      EXPECT_LE(uab, umax + 1e-12);
    };
    check(pin);
    check(sq);
  }
}

TEST(LossOracleProperties, LatticeClosureOfMembership) {
  CounterRng rng(333);
  int checked = 0;
  for (int rep = 0; rep < 400 && checked < 200; ++rep) {
    const DesignGroups g = random_groups(rng, 4, 8);
    const std::size_t m = g.num_groups();
    const double beta = 0.2 + 0.6 * rng.uniform();
    const PinballOracle oracle(g, beta);
    const SolutionBand band = minmax_band(oracle);

    // two random members: isotonic vectors inside the band whose strict
    // increases follow the band's strict increases
    auto random_member = [&]() {
      std::vector<double> q(m);
      double lambda = rng.uniform();
      for (std::size_t j = 0; j < m; ++j)
        q[j] = band.lower[j] + lambda * (band.upper[j] - band.lower[j]);
      return q;
    };
    const auto q1 = random_member();
    const auto q2 = random_member();
    if (!check_membership(oracle, q1) || !check_membership(oracle, q2)) {
      ADD_FAILURE() << "band interpolants must be members";
      continue;
    }
    std::vector<double> qmin(m), qmax(m);
    for (std::size_t j = 0; j < m; ++j) {
      qmin[j] = std::min(q1[j], q2[j]);
      qmax[j] = std::max(q1[j], q2[j]);
    }
    EXPECT_TRUE(check_membership(oracle, qmin));
    EXPECT_TRUE(check_membership(oracle, qmax));
    ++checked;
  }
  EXPECT_GE(checked, 200);
}

TEST(LossOracleProperties, BandExtremalityAgainstBruteForce) {
  CounterRng rng(444);
  for (int rep = 0; rep < 100; ++rep) {
    const DesignGroups g = random_groups(rng, 4, 7);
    const std::size_t m = g.num_groups();
    const double beta = 0.2 + 0.6 * rng.uniform();
    const PinballOracle oracle(g, beta);
    const SolutionBand band = minmax_band(oracle);

    std::vector<ExplicitLoss> losses(m);
    for (std::size_t j = 0; j < m; ++j)
      for (double y : g.responses(j)) losses[j].pinball.push_back({beta, y});
    const auto bf = brute_force_band(losses, g.distinct_responses());

    // every grid minimizer lies inside [lower, upper], and the band edges
    // are themselves minimizers at grid points
    for (std::size_t j = 0; j < m; ++j) {
      EXPECT_LE(band.lower[j], bf.lower[j] + 1e-12);
      EXPECT_GE(band.upper[j], bf.upper[j] - 1e-12);
    }
    EXPECT_NEAR(isocdf::pinball_risk(g, band.lower, beta).value, bf.min_value,
                1e-10 * std::max(1.0, bf.min_value));
    EXPECT_NEAR(isocdf::pinball_risk(g, band.upper, beta).value, bf.min_value,
                1e-10 * std::max(1.0, bf.min_value));
  }
}

// ----- brute force oracle itself --------------------------------------------

TEST(BruteForce, TwoPointCounterexampleBand) {
  std::vector<ExplicitLoss> losses(2);
  losses[0].pinball.push_back({0.5, 1.0});
  losses[1].pinball.push_back({0.5, 0.0});
  const auto res = brute_force_band(losses, std::vector<double>{0.0, 0.5, 1.0});
  EXPECT_EQ(res.lower, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(res.upper, (std::vector<double>{1.0, 1.0}));
  EXPECT_NEAR(res.min_value, 0.5, 1e-15);
}

TEST(BruteForce, QuadraticDegenerateBand) {
  std::vector<ExplicitLoss> losses(1);
  losses[0].quadratic.push_back({1.0, 0.75});
  const auto res = brute_force_band(losses, std::vector<double>{0.0, 0.75, 1.0});
  EXPECT_EQ(res.lower, (std::vector<double>{0.75}));
  EXPECT_EQ(res.upper, (std::vector<double>{0.75}));
  EXPECT_EQ(res.num_minimizers, 1u);
}

TEST(BruteForce, GridCapIsEnforced) {
  std::vector<ExplicitLoss> losses(8);
  for (auto& l : losses) l.quadratic.push_back({1.0, 0.0});
  std::vector<double> grid(300);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<double>(i);
  EXPECT_THROW(brute_force_band(losses, grid, 1000), std::invalid_argument);
}

}  // namespace
