#include "isocdf/mc_bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace {

using isocdf::dkw_classical_bound;
using isocdf::dkw_mc;
using isocdf::dkw_paper_bound;
using isocdf::lln_exp_mc;
using isocdf::lln_tail_bound;
using isocdf::lln_tail_constant;
using isocdf::uniform_dist;

TEST(DkwMc, ZeroThresholdHasFrequencyOne) {
  const auto res = dkw_mc({uniform_dist(0, 1)}, {0.0}, 500, 42);
  EXPECT_EQ(res.frequency[0], 1.0);
}

// k = 1 with a single Uniform(0,1): the statistic is max(U, 1-U) and
// P(max(U, 1-U) >= eta) = 2(1 - eta) for eta in [0.5, 1].
TEST(DkwMc, OneSampleClosedForm) {
  const std::vector<double> etas{0.6, 0.75, 0.9};
  const std::int64_t reps = 200000;
  const auto res = dkw_mc({uniform_dist(0, 1)}, etas, reps, 1234);
  for (std::size_t e = 0; e < etas.size(); ++e) {
    const double p = 2.0 * (1.0 - etas[e]);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(reps));
    EXPECT_NEAR(res.frequency[e], p, 5 * se) << "eta=" << etas[e];
  }
}

// iid case at k = 100: frequencies below the classical DKW bound with
// constant 2 plus Monte Carlo noise (which implies the paper bound since
// its constant is larger than 2).
TEST(DkwMc, IidCaseWithinClassicalBound) {
  std::vector<isocdf::UnivariateDist> dists(100, uniform_dist(0, 1));
  const std::vector<double> etas{0.75, 1.0, 1.5, 2.0};
  const std::int64_t reps = 20000;
  const auto res = dkw_mc(dists, etas, reps, 777);
  for (std::size_t e = 0; e < etas.size(); ++e) {
    const double bound = dkw_classical_bound(etas[e]);
    const double se = std::sqrt(std::max(bound, 1e-4) * 1.0 / static_cast<double>(reps));
    EXPECT_LE(res.frequency[e], std::min(1.0, bound) + 3 * se) << "eta=" << etas[e];
    EXPECT_LE(res.frequency[e], dkw_paper_bound(etas[e]));
  }
}

TEST(DkwMc, InvalidInputs) {
  EXPECT_THROW(dkw_mc({}, {0.5}, 10, 1), std::invalid_argument);
  EXPECT_THROW(dkw_mc({uniform_dist(0, 1)}, {0.5}, 0, 1), std::invalid_argument);
}

TEST(LlnExpMc, EtaAboveIncrementBoundNeverExceeded) {
  const auto law = isocdf::rademacher_half_law();
  const auto res = lln_exp_mc(10, {0.51, 0.8}, 2000, 9, law, 200);
  EXPECT_EQ(res.frequency[0], 0.0);
  EXPECT_EQ(res.frequency[1], 0.0);
}

// n_o = n_max reduces the sup to a single partial mean, cross-checked
// against a direct simulation of |S_{n_o}| / n_o.
TEST(LlnExpMc, SingleIndexReduction) {
  const auto law = isocdf::rademacher_half_law();
  const std::int64_t n_o = 64;
  const double eta = 0.15;
  const std::int64_t reps = 40000;
  const auto res = lln_exp_mc(n_o, {eta}, reps, 31, law, n_o);
  // direct: same streams, same statistic
  std::int64_t hits = 0;
  for (std::int64_t rep = 0; rep < reps; ++rep) {
    isocdf::CounterRng rng(31, static_cast<std::uint64_t>(rep));
    double s = 0.0;
    for (std::int64_t i = 0; i < n_o; ++i) s += law.sample(rng);
    if (std::abs(s) / static_cast<double>(n_o) >= eta) ++hits;
  }
  EXPECT_DOUBLE_EQ(res.frequency[0],
                   static_cast<double>(hits) / static_cast<double>(reps));
}

TEST(LlnTailConstant, MatchesHandComputation) {
  // c = 2, c' = 1.5, C = 2: beta = (4/3 + 1)^2 / (16/3) = 49/48,
  // p_o = min{1/log(beta), log(8)} = log(8),
  // C' = 4 (1 + 1/(log(8) log(49/48)))
  const double beta = (49.0 / 48.0);
  const double expected = 4.0 * (1.0 + 1.0 / (std::log(8.0) * std::log(beta)));
  EXPECT_NEAR(lln_tail_constant(2.0, 1.5, 2.0), expected, 1e-12);
  EXPECT_THROW(lln_tail_constant(2.0, 2.5, 2.0), std::invalid_argument);
}

// Scaled Rademacher increments are in the c = 2 regime; the truncated sup
// exceedance must stay below the lemma's bound with c' = 1.5.
TEST(LlnExpMc, ExceedanceWithinLemmaBound) {
  const auto law = isocdf::rademacher_half_law();
  const std::int64_t reps = 10000;
  for (std::int64_t n_o : {50, 200}) {
    const auto res = lln_exp_mc(n_o, {0.3, 0.5}, reps, 555, law, 5000);
    for (std::size_t e = 0; e < res.eta.size(); ++e) {
      const double bound = lln_tail_bound(2.0, 1.5, 2.0, n_o, res.eta[e]);
      EXPECT_LE(res.frequency[e], bound) << "n_o=" << n_o << " eta=" << res.eta[e];
    }
  }
}

}  // namespace
