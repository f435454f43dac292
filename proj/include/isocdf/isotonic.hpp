#pragma once

// Isotonic regression over a totally ordered index set.
//
// Two layers live here:
//   * weighted least squares via the pool-adjacent-violators algorithm
//     (single forward pass with block merging, linear time);
//   * the general convex-loss machinery: given an oracle that reports, for
//     every index interval [a,b], the interval [L_ab, U_ab] on which the
//     summed loss R_a + ... + R_b is minimal, the min-max / max-min formulae
//     produce the componentwise smallest and largest vectors of the solution
//     set, and a membership test decides whether a given isotonic vector is a
//     minimizer.
//
// The engine is isotonic-native; antitonic problems are solved by index
// reversal so that one code path carries all the tests.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace isocdf {

// Unique minimizer of sum_j weights[j] * (targets[j] - f[j])^2 over
// non-decreasing f.  Blocks carry (weighted sum, weight) pairs.
inline std::vector<double> pava_isotonic_ls(std::span<const double> targets,
                                            std::span<const double> weights) {
  const std::size_t m = targets.size();
  if (weights.size() != m)
    throw std::invalid_argument("pava: targets/weights length mismatch");
  if (m == 0) throw std::invalid_argument("pava: empty input");
  struct Block {
    double wsum;   // sum of w_j * t_j
    double w;      // sum of w_j
    std::size_t end;  // one past the last index covered
  };
  std::vector<Block> blocks;
  blocks.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!(weights[j] > 0.0))
      throw std::invalid_argument("pava: weights must be positive");
    blocks.push_back({targets[j] * weights[j], weights[j], j + 1});
    while (blocks.size() > 1) {
      const Block& b = blocks.back();
      const Block& a = blocks[blocks.size() - 2];
      // merge while the means violate monotonicity: mean(a) >= mean(b)
      if (a.wsum * b.w < b.wsum * a.w) break;
      Block merged{a.wsum + b.wsum, a.w + b.w, b.end};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> fit(m);
  std::size_t begin = 0;
  for (const Block& b : blocks) {
    const double mean = b.wsum / b.w;
    for (std::size_t j = begin; j < b.end; ++j) fit[j] = mean;
    begin = b.end;
  }
  return fit;
}

// Minimizer of the same objective over non-increasing f, via index reversal.
inline std::vector<double> pava_antitonic_ls(std::span<const double> targets,
                                             std::span<const double> weights) {
  const std::size_t m = targets.size();
  if (weights.size() != m)
    throw std::invalid_argument("pava: targets/weights length mismatch");
  std::vector<double> rt(targets.rbegin(), targets.rend());
  std::vector<double> rw(weights.rbegin(), weights.rend());
  std::vector<double> fit = pava_isotonic_ls(rt, rw);
  std::reverse(fit.begin(), fit.end());
  return fit;
}

// Componentwise smallest (lower) and largest (upper) minimizers.
struct SolutionBand {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Oracle contract for the convex-loss machinery: size() indices, and
// interval_minimizers(a, b) = (L_ab, U_ab) for 0 <= a <= b < size().
template <typename O>
concept IntervalLossOracle = requires(const O& o, std::size_t a, std::size_t b) {
  { o.size() } -> std::convertible_to<std::size_t>;
  { o.interval_minimizers(a, b) } -> std::convertible_to<std::pair<double, double>>;
};

namespace detail {

// Given full tables L(a,b), U(a,b) (row-major, entry a*m+b valid for a<=b),
// compute both evaluation orders of the min-max formulae and check they
// agree.  lower_j = max_{a<=j} min_{b>=j} L_ab = min_{b>=j} max_{a<=j} L_ab,
// upper_j analogous with U.
inline SolutionBand band_from_tables(const std::vector<double>& L,
                                     const std::vector<double>& U,
                                     std::size_t m, double tol) {
  auto maxmin = [m](const std::vector<double>& T) {
    // suffix minima per row a, then running max over a <= j
    std::vector<double> out(m, -std::numeric_limits<double>::infinity());
    std::vector<double> sufmin(m);
    for (std::size_t a = 0; a < m; ++a) {
      double cur = std::numeric_limits<double>::infinity();
      for (std::size_t b = m; b-- > a;) {
        cur = std::min(cur, T[a * m + b]);
        sufmin[b] = cur;
      }
      for (std::size_t j = a; j < m; ++j) out[j] = std::max(out[j], sufmin[j]);
    }
    return out;
  };
  auto minmax = [m](const std::vector<double>& T) {
    // prefix maxima per column b, then running min over b >= j
    std::vector<double> out(m, std::numeric_limits<double>::infinity());
    std::vector<double> premax(m);
    for (std::size_t b = m; b-- > 0;) {
      double cur = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a <= b; ++a) {
        cur = std::max(cur, T[a * m + b]);
        premax[a] = cur;
      }
      for (std::size_t j = 0; j <= b; ++j) out[j] = std::min(out[j], premax[j]);
    }
    return out;
  };
  std::vector<double> lo1 = maxmin(L), lo2 = minmax(L);
  std::vector<double> up1 = minmax(U), up2 = maxmin(U);
  for (std::size_t j = 0; j < m; ++j) {
    if (!(std::abs(lo1[j] - lo2[j]) <= tol) || !(std::abs(up1[j] - up2[j]) <= tol))
      throw std::runtime_error(
          "minmax_band: min-max and max-min orders disagree (broken oracle)");
  }
  return SolutionBand{std::move(lo1), std::move(up1)};
}

}  // namespace detail

// Solution band of argmin over isotonic vectors of sum_j R_j(x_j), from the
// oracle's interval minimizers.  Both orders of the min-max formulae are
// evaluated and must agree to `tol`.  O(m^2) oracle calls and O(m^2) memory;
// intended for m up to a few hundred -- larger problems should use a
// dedicated path (pooled sample quantiles for pinball loss, PAVA for
// squared loss).
template <IntervalLossOracle Oracle>
SolutionBand minmax_band(const Oracle& oracle, double tol = 1e-12) {
  const std::size_t m = oracle.size();
  if (m == 0) throw std::invalid_argument("minmax_band: empty oracle");
  std::vector<double> L(m * m), U(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      const auto [lo, hi] = oracle.interval_minimizers(a, b);
      if (!(lo <= hi))
        throw std::runtime_error("minmax_band: oracle returned L > U");
      L[a * m + b] = lo;
      U[a * m + b] = hi;
    }
  return detail::band_from_tables(L, U, m, tol);
}

// Characterization test: x (non-decreasing) minimizes sum_j R_j(x_j) iff for
// all a <= b,   x_a <= U_ab whenever x_{a-1} < x_a,   and
//               x_b >= L_ab whenever x_b < x_{b+1},
// with x_{-1} = -inf, x_m = +inf.  Comparisons are exact by default; pass a
// tolerance for oracles whose L/U are themselves rounded (squared loss).
template <IntervalLossOracle Oracle>
bool check_membership(const Oracle& oracle, std::span<const double> x,
                      double tol = 0.0) {
  const std::size_t m = oracle.size();
  if (x.size() != m)
    throw std::invalid_argument("check_membership: length mismatch");
  for (std::size_t j = 0; j + 1 < m; ++j)
    if (x[j] > x[j + 1]) return false;
  for (std::size_t a = 0; a < m; ++a) {
    const bool rises_at_a = (a == 0) || (x[a - 1] < x[a]);
    for (std::size_t b = a; b < m; ++b) {
      const bool rises_after_b = (b + 1 == m) || (x[b] < x[b + 1]);
      if (!rises_at_a && !rises_after_b) continue;
      const auto [lo, hi] = oracle.interval_minimizers(a, b);
      if (rises_at_a && !(x[a] <= hi + tol)) return false;
      if (rises_after_b && !(x[b] >= lo - tol)) return false;
    }
  }
  return true;
}

// Least-squares oracle: R_j(t) = w_j (t - y_j)^2 / 2, so L_ab = U_ab is the
// weighted mean over [a,b].  Serves as an independent route to the PAVA fit.
class SquaredLossOracle {
 public:
  SquaredLossOracle(std::span<const double> targets, std::span<const double> weights) {
    if (targets.size() != weights.size() || targets.empty())
      throw std::invalid_argument("SquaredLossOracle: bad input");
    wsum_.resize(targets.size() + 1, 0.0);
    w_.resize(targets.size() + 1, 0.0);
    for (std::size_t j = 0; j < targets.size(); ++j) {
      if (!(weights[j] > 0.0))
        throw std::invalid_argument("SquaredLossOracle: weights must be positive");
      wsum_[j + 1] = wsum_[j] + targets[j] * weights[j];
      w_[j + 1] = w_[j] + weights[j];
    }
  }
  std::size_t size() const { return w_.size() - 1; }
  std::pair<double, double> interval_minimizers(std::size_t a, std::size_t b) const {
    const double mean = (wsum_[b + 1] - wsum_[a]) / (w_[b + 1] - w_[a]);
    return {mean, mean};
  }

 private:
  std::vector<double> wsum_;
  std::vector<double> w_;
};

}  // namespace isocdf
