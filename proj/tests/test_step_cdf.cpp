#include "isocdf/step_cdf.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "isocdf/random.hpp"

namespace {

using isocdf::QuantileSide;
using isocdf::Ratio;
using isocdf::StepCdf;

TEST(StepCdf, EvaluationIsRightContinuousStep) {
  // two equally weighted points
  const StepCdf f = StepCdf::from_sorted(std::vector<double>{3.0, 5.0});
  EXPECT_EQ(f(2.9), 0.0);
  EXPECT_EQ(f(3.0), 0.5);
  EXPECT_EQ(f(4.9), 0.5);
  EXPECT_EQ(f(5.0), 1.0);
  EXPECT_EQ(f(100.0), 1.0);
  EXPECT_EQ(f.left_limit(3.0), 0.0);
  EXPECT_EQ(f.left_limit(5.0), 0.5);
}

TEST(StepCdf, SingletonSample) {
  const StepCdf f = StepCdf::from_sorted(std::vector<double>{7.0});
  EXPECT_EQ(f(6.999), 0.0);
  EXPECT_EQ(f(7.0), 1.0);
  for (double beta : {0.01, 0.3, 0.5, 0.99}) {
    EXPECT_EQ(f.quantile(beta, QuantileSide::minimal), 7.0);
    EXPECT_EQ(f.quantile(beta, QuantileSide::maximal), 7.0);
  }
}

TEST(StepCdf, TiedResponses) {
  const StepCdf f = StepCdf::from_sorted(std::vector<double>{2.0, 2.0, 4.0});
  ASSERT_EQ(f.num_jumps(), 2u);
  EXPECT_DOUBLE_EQ(f(2.0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(f(4.0), 1.0);
}

TEST(StepCdf, QuantileSplitsAtPlateau) {
  // jumps at {1: 1/3, 2: 2/3, 3: 1}; at beta = 2/3 exactly, the minimal
  // quantile is 2 and the maximal quantile is 3.  The exact level is only
  // expressible as a rational.
  const StepCdf f = StepCdf::from_sorted(std::vector<double>{1.0, 2.0, 3.0});
  EXPECT_EQ(f.quantile(Ratio{2, 3}, QuantileSide::minimal), 2.0);
  EXPECT_EQ(f.quantile(Ratio{2, 3}, QuantileSide::maximal), 3.0);
  // the closest double lies strictly below 2/3, so both sides give 2
  EXPECT_EQ(f.quantile(2.0 / 3.0, QuantileSide::minimal), 2.0);
  EXPECT_EQ(f.quantile(2.0 / 3.0, QuantileSide::maximal), 2.0);
  // a dyadic plateau is hit exactly by a double level
  const StepCdf g = StepCdf::from_sorted(std::vector<double>{1.0, 2.0});
  EXPECT_EQ(g.quantile(0.5, QuantileSide::minimal), 1.0);
  EXPECT_EQ(g.quantile(0.5, QuantileSide::maximal), 2.0);
}

TEST(StepCdf, QuantileLevelValidation) {
  const StepCdf f = StepCdf::from_sorted(std::vector<double>{1.0});
  EXPECT_THROW(f.quantile(0.0, QuantileSide::minimal), std::invalid_argument);
  EXPECT_THROW(f.quantile(1.0, QuantileSide::minimal), std::invalid_argument);
  EXPECT_THROW(f.quantile(-0.2, QuantileSide::maximal), std::invalid_argument);
  EXPECT_THROW(f.quantile(Ratio{3, 3}, QuantileSide::minimal), std::invalid_argument);
}

TEST(StepCdf, InvalidConstruction) {
  EXPECT_THROW(StepCdf({}, {}), std::invalid_argument);
  EXPECT_THROW(StepCdf({1.0, 1.0}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(StepCdf({1.0, 2.0}, {2, 2}), std::invalid_argument);
  EXPECT_THROW(StepCdf::from_sorted(std::vector<double>{2.0, 1.0}),
               std::invalid_argument);
}

// Properties on random samples: monotone right-continuous step shape,
// quantile ordering and monotonicity in beta, and the Galois connection
// y >= F^{-1}(beta)  <=>  F(y) >= beta.
TEST(StepCdf, RandomizedShapeAndGaloisProperties) {
  isocdf::CounterRng rng(20240517);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 12);
    std::vector<double> sample(n);
    for (double& v : sample)
      v = std::floor(rng.uniform() * 8.0);  // coarse grid forces ties
    std::sort(sample.begin(), sample.end());
    const StepCdf f = StepCdf::from_sorted(sample);

    const auto& pts = f.jump_points();
    double prev = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double v = f(pts[i]);
      EXPECT_GT(v, prev);
      EXPECT_EQ(f.left_limit(pts[i]), prev < 0.0 ? 0.0 : prev);
      EXPECT_EQ(f(pts[i] + 0.25), v);  // constant until the next jump
      prev = v;
    }
    EXPECT_EQ(f(pts.back()), 1.0);
    EXPECT_EQ(f(pts.front() - 0.5), 0.0);

    double last_min = -1e300, last_max = -1e300;
    for (double beta : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      const double qmin = f.quantile(beta, QuantileSide::minimal);
      const double qmax = f.quantile(beta, QuantileSide::maximal);
      EXPECT_LE(qmin, qmax);
      EXPECT_LE(last_min, qmin);
      EXPECT_LE(last_max, qmax);
      last_min = qmin;
      last_max = qmax;
      for (double y : pts) {
        EXPECT_EQ(y >= qmin, f.reaches(y, beta));
        // rounded comparison agrees at dyadic levels, where counts over a
        // small total cannot straddle beta within one ulp
        if (beta == 0.25 || beta == 0.5 || beta == 0.75)
          EXPECT_EQ(y >= qmin, f(y) >= beta);
      }
    }
  }
}

TEST(StepCdf, SupDistanceExactOnSteps) {
  const StepCdf f = StepCdf::from_sorted(std::vector<double>{0.0, 1.0});
  const StepCdf g = StepCdf::from_sorted(std::vector<double>{0.0, 0.0, 1.0});
  // |F - G| is |1/2 - 2/3| on [0,1)
  EXPECT_NEAR(isocdf::sup_distance(f, g), 2.0 / 3.0 - 0.5, 1e-15);
  EXPECT_EQ(isocdf::sup_distance(f, f), 0.0);
}

}  // namespace
