#pragma once

// Right-continuous step distribution functions with a finite jump set.
// Jump heights are stored as integer cumulative counts over a total weight,
// so that comparisons of F(y) against a level beta can be carried out in
// exact rational arithmetic.  This matters at plateaus: whether F(y) >= beta
// holds with equality decides between the minimal and maximal quantile, and
// no floating-point tolerance can resolve it reliably.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace isocdf {

// Exact level for quantile queries, beta = num/den with 0 < num < den.
struct Ratio {
  std::int64_t num;
  std::int64_t den;
};

enum class QuantileSide { minimal, maximal };

namespace detail {

// Sign of count/total - beta, computed exactly.  beta must be in (0,1),
// 0 <= count <= total.  Decomposes beta into m * 2^(e-53) with m a 53-bit
// integer and cross-multiplies; shifts that would overflow 128 bits can only
// occur for tiny beta, where the answer is forced.
inline int compare_ratio(std::int64_t count, std::int64_t total, double beta) {
  if (count == 0) return -1;  // 0 < beta
  int e = 0;
  const double frac = std::frexp(beta, &e);  // beta = frac * 2^e, frac in [0.5,1)
  const auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
  const int shift = 53 - e;  // beta < 1 implies e <= 0, so shift >= 53
  if (shift >= 120) return 1;  // count * 2^shift certainly exceeds mant * total
  const __int128 lhs = static_cast<__int128>(count) << shift;
  const __int128 rhs = static_cast<__int128>(mant) * total;
  if (lhs < rhs) return -1;
  if (lhs > rhs) return 1;
  return 0;
}

inline int compare_ratio(std::int64_t count, std::int64_t total, Ratio beta) {
  const __int128 lhs = static_cast<__int128>(count) * beta.den;
  const __int128 rhs = static_cast<__int128>(beta.num) * total;
  if (lhs < rhs) return -1;
  if (lhs > rhs) return 1;
  return 0;
}

inline void require_unit_level(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("quantile level must lie in (0,1)");
}

inline void require_unit_level(Ratio beta) {
  if (beta.den <= 0 || beta.num <= 0 || beta.num >= beta.den)
    throw std::invalid_argument("quantile level must lie in (0,1)");
}

}  // namespace detail

class StepCdf {
 public:
  // jump_points strictly increasing, cumulative counts strictly increasing
  // and positive, ending at the total weight.
  StepCdf(std::vector<double> jump_points, std::vector<std::int64_t> cumulative)
      : points_(std::move(jump_points)), cum_(std::move(cumulative)) {
    if (points_.empty() || points_.size() != cum_.size())
      throw std::invalid_argument("StepCdf: need matching non-empty jump data");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!std::isfinite(points_[i]))
        throw std::invalid_argument("StepCdf: non-finite jump point");
      if (i > 0 && !(points_[i - 1] < points_[i]))
        throw std::invalid_argument("StepCdf: jump points not increasing");
      if (cum_[i] <= (i > 0 ? cum_[i - 1] : 0))
        throw std::invalid_argument("StepCdf: cumulative counts not increasing");
    }
  }

  // Empirical CDF of a sorted sample (ties allowed).
  static StepCdf from_sorted(std::span<const double> sorted) {
    if (sorted.empty()) throw std::invalid_argument("StepCdf: empty sample");
    std::vector<double> pts;
    std::vector<std::int64_t> cum;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i + 1 < sorted.size() && !(sorted[i] <= sorted[i + 1]))
        throw std::invalid_argument("StepCdf: sample not sorted");
      if (pts.empty() || sorted[i] != pts.back()) pts.push_back(sorted[i]);
      if (cum.size() < pts.size())
        cum.push_back(static_cast<std::int64_t>(i) + 1);
      else
        cum.back() = static_cast<std::int64_t>(i) + 1;
    }
    return StepCdf(std::move(pts), std::move(cum));
  }

  std::int64_t total() const { return cum_.back(); }
  std::size_t num_jumps() const { return points_.size(); }
  const std::vector<double>& jump_points() const { return points_; }
  const std::vector<std::int64_t>& cumulative_counts() const { return cum_; }

  std::vector<double> values() const {
    std::vector<double> v(cum_.size());
    for (std::size_t i = 0; i < cum_.size(); ++i)
      v[i] = static_cast<double>(cum_[i]) / static_cast<double>(total());
    return v;
  }

  // Right-continuous evaluation F(y).
  double operator()(double y) const {
    return static_cast<double>(count_at_or_below(y)) /
           static_cast<double>(total());
  }

  // Left limit F(y-).
  double left_limit(double y) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), y);
    if (it == points_.begin()) return 0.0;
    return static_cast<double>(cum_[static_cast<std::size_t>(it - points_.begin()) - 1]) /
           static_cast<double>(total());
  }

  std::int64_t count_at_or_below(double y) const {
    auto it = std::upper_bound(points_.begin(), points_.end(), y);
    if (it == points_.begin()) return 0;
    return cum_[static_cast<std::size_t>(it - points_.begin()) - 1];
  }

  // Exact predicate F(y) >= beta; unlike comparing the rounded double value
  // of operator(), this resolves F(y) == beta correctly at plateaus.
  template <typename Level>
  bool reaches(double y, Level beta) const {
    return detail::compare_ratio(count_at_or_below(y), total(), beta) >= 0;
  }

  // Minimal quantile min{y : F(y) >= beta}, maximal inf{y : F(y) > beta}.
  template <typename Level>
  double quantile(Level beta, QuantileSide side) const {
    detail::require_unit_level(beta);
    const std::int64_t w = total();
    auto reached = [&](std::size_t i) {
      const int c = detail::compare_ratio(cum_[i], w, beta);
      return side == QuantileSide::minimal ? c >= 0 : c > 0;
    };
    std::size_t lo = 0, hi = points_.size() - 1;
    // last jump has F = 1 > beta, so hi always satisfies the predicate
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (reached(mid))
        hi = mid;
      else
        lo = mid + 1;
    }
    return points_[lo];
  }

 private:
  std::vector<double> points_;
  std::vector<std::int64_t> cum_;
};

template <typename Level>
inline double step_quantile(const StepCdf& f, Level beta, QuantileSide side) {
  return f.quantile(beta, side);
}

// Sup distance between two step CDFs.  Both functions are right-continuous
// steps, so the supremum is attained at a jump point of either one and is a
// rational with denominator total(f) * total(g); the maximum is found in
// integer arithmetic and converted with an upward nudge, so the returned
// double is never below the true sup.
inline double sup_distance(const StepCdf& f, const StepCdf& g) {
  const std::int64_t n1 = f.total(), n2 = g.total();
  __int128 best = 0;
  auto consider = [&](double y) {
    __int128 d = static_cast<__int128>(f.count_at_or_below(y)) * n2 -
                 static_cast<__int128>(g.count_at_or_below(y)) * n1;
    if (d < 0) d = -d;
    if (d > best) best = d;
  };
  for (double y : f.jump_points()) consider(y);
  for (double y : g.jump_points()) consider(y);
  if (best == 0) return 0.0;
  const double approx = static_cast<double>(best) /
                        (static_cast<double>(n1) * static_cast<double>(n2));
  return std::nextafter(approx, 2.0);
}

}  // namespace isocdf
