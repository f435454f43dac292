#pragma once

// Exhaustive reference solver for small isotonic regression instances.
// Enumerates every non-decreasing vector with components drawn from a finite
// grid, evaluates the total loss directly, and reports the componentwise
// min and max of the argmin set.  Used by the verification suites and tests
// as an oracle that is independent of the min-max machinery.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace isocdf {

// Per-index convex loss: a sum of pinball terms (beta, y) and quadratic
// terms (weight, center).
struct ExplicitLoss {
  struct PinballTerm {
    double beta;
    double y;
  };
  struct QuadraticTerm {
    double weight;
    double center;
  };
  std::vector<PinballTerm> pinball;
  std::vector<QuadraticTerm> quadratic;

  double operator()(double q) const {
    double v = 0.0;
    for (const auto& t : pinball) {
      const double z = t.y - q;
      v += (t.beta - (z < 0.0 ? 1.0 : 0.0)) * z;
    }
    for (const auto& t : quadratic) v += t.weight * (q - t.center) * (q - t.center);
    return v;
  }
};

struct BruteForceResult {
  std::vector<double> lower;      // componentwise min of the argmin set
  std::vector<double> upper;      // componentwise max of the argmin set
  double min_value = 0.0;
  std::size_t num_minimizers = 0;
  std::vector<std::vector<double>> minimizers;  // filled only on request
};

// grid must be sorted (duplicates are tolerated but wasteful).  The number
// of non-decreasing vectors is C(|grid|+m-1, m); instances beyond `cap`
// candidates are rejected.  Ties in the total loss are resolved with a
// relative tolerance of 1e-12.
inline BruteForceResult brute_force_band(const std::vector<ExplicitLoss>& losses,
                                         const std::vector<double>& grid,
                                         std::size_t cap = 5'000'000,
                                         bool keep_minimizers = false) {
  const std::size_t m = losses.size();
  if (m == 0 || grid.empty())
    throw std::invalid_argument("brute_force_band: empty instance");
  double count = 1.0;  // C(g+m-1, m) computed in floating point for the cap check
  for (std::size_t j = 1; j <= m; ++j)
    count = count * (static_cast<double>(grid.size()) + m - j) / static_cast<double>(j);
  if (count > static_cast<double>(cap))
    throw std::invalid_argument("brute_force_band: grid too large");

  std::vector<std::size_t> idx(m, 0);  // non-decreasing index vector into grid
  std::vector<double> q(m);
  BruteForceResult res;
  res.min_value = std::numeric_limits<double>::infinity();
  const auto eval = [&]() {
    double v = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      q[j] = grid[idx[j]];
      v += losses[j](q[j]);
    }
    return v;
  };
  for (;;) {
    const double v = eval();
    const bool first = res.num_minimizers == 0;
    const double tie = first ? 0.0 : 1e-12 * std::max(1.0, std::abs(res.min_value));
    if (first || v < res.min_value - tie) {
      res.min_value = v;
      res.lower = q;
      res.upper = q;
      res.num_minimizers = 1;
      if (keep_minimizers) res.minimizers = {q};
    } else if (v <= res.min_value + tie) {
      for (std::size_t j = 0; j < m; ++j) {
        res.lower[j] = std::min(res.lower[j], q[j]);
        res.upper[j] = std::max(res.upper[j], q[j]);
      }
      ++res.num_minimizers;
      if (keep_minimizers) res.minimizers.push_back(q);
    }
    // advance to the next non-decreasing index vector
    std::size_t j = m;
    for (;;) {
      if (j == 0) return res;
      --j;
      if (idx[j] + 1 < grid.size()) {
        const std::size_t v0 = idx[j] + 1;
        for (std::size_t t = j; t < m; ++t) idx[t] = v0;
        break;
      }
    }
  }
}

}  // namespace isocdf
