#pragma once

// Quantile-side estimators: the regression-quantile solution band (pinball
// loss over isotonic vectors), plug-in quantiles read off the fitted CDF
// family, pinball risk, a smooth band-constrained quantile curve, and two
// quantile-calculus helpers exported for the simulation harness.
//
// The band is computed from pooled sample quantiles; one pooled quantile is
// an order statistic of the merged responses, selected through exact
// integer comparisons of counts against beta.  The plug-in quantiles use the
// same exact comparisons on the rational fitted values, which makes the
// band/plug-in equality an exact vector identity rather than a tolerance
// check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "isocdf/cdf_fit.hpp"
#include "isocdf/design.hpp"
#include "isocdf/isotonic.hpp"
#include "isocdf/step_cdf.hpp"

namespace isocdf {

struct QuantileBand {
  double beta;
  std::vector<double> xs;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct PinballRisk {
  double beta;
  double value;
};

namespace detail {

// Smallest count c in 1..w with c/w >= beta (minimal side) or c/w > beta
// (maximal side); the order statistic at that count is the pooled quantile.
template <typename Level>
std::int64_t level_count(std::int64_t w, Level beta, QuantileSide side) {
  auto reached = [&](std::int64_t c) {
    const int cmp = compare_ratio(c, w, beta);
    return side == QuantileSide::minimal ? cmp >= 0 : cmp > 0;
  };
  double approx = 0.0;
  if constexpr (std::is_same_v<Level, Ratio>)
    approx = static_cast<double>(w) * static_cast<double>(beta.num) /
             static_cast<double>(beta.den);
  else
    approx = static_cast<double>(w) * beta;
  std::int64_t c = std::clamp<std::int64_t>(
      static_cast<std::int64_t>(std::ceil(approx)), 1, w);
  while (c > 1 && reached(c - 1)) --c;
  while (!reached(c)) ++c;
  return c;
}

// Fenwick tree over response ranks supporting k-th order statistic queries.
class RankSelector {
 public:
  explicit RankSelector(std::size_t size) : tree_(size + 1, 0) {
    log_ = 0;
    while ((std::size_t{1} << (log_ + 1)) <= size) ++log_;
  }
  void clear() { std::fill(tree_.begin(), tree_.end(), 0); }
  void add(std::size_t rank) {
    for (std::size_t i = rank + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // smallest rank whose prefix count reaches c (1-based count)
  std::size_t select(std::int64_t c) const {
    std::size_t pos = 0;
    for (std::size_t step = std::size_t{1} << log_; step > 0; step >>= 1) {
      if (pos + step < tree_.size() && tree_[pos + step] < c) {
        pos += step;
        c -= tree_[pos];
      }
    }
    return pos;  // 0-based rank
  }

 private:
  std::vector<std::int64_t> tree_;
  std::size_t log_;
};

}  // namespace detail

// Pinball-loss oracle for the generic min-max machinery: L_ab and U_ab are
// the minimal and maximal pooled sample beta-quantiles of groups a..b.
class PinballOracle {
 public:
  PinballOracle(const DesignGroups& groups, double beta)
      : groups_(&groups), beta_(beta) {
    detail::require_unit_level(beta);
  }
  std::size_t size() const { return groups_->num_groups(); }
  std::pair<double, double> interval_minimizers(std::size_t a, std::size_t b) const {
    std::vector<double> merged;
    for (std::size_t j = a; j <= b; ++j) {
      const auto& r = groups_->responses(j);
      merged.insert(merged.end(), r.begin(), r.end());
    }
    std::sort(merged.begin(), merged.end());
    const auto w = static_cast<std::int64_t>(merged.size());
    const auto cl = detail::level_count(w, beta_, QuantileSide::minimal);
    const auto cu = detail::level_count(w, beta_, QuantileSide::maximal);
    return {merged[static_cast<std::size_t>(cl - 1)],
            merged[static_cast<std::size_t>(cu - 1)]};
  }

 private:
  const DesignGroups* groups_;
  double beta_;
};

// Empirical pinball risk T_beta(q) = sum_j sum_{i: X_i = x_j} rho_beta(Y_i - q_j).
inline PinballRisk pinball_risk(const DesignGroups& groups,
                                std::span<const double> q, double beta) {
  detail::require_unit_level(beta);
  if (q.size() != groups.num_groups())
    throw std::invalid_argument("pinball_risk: vector length mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    for (double y : groups.responses(j)) {
      const double z = y - q[j];
      total += (beta - (z < 0.0 ? 1.0 : 0.0)) * z;
    }
  }
  return {beta, total};
}

// Componentwise smallest and largest minimizers of the pinball risk over
// isotonic vectors: lower_j = max_{r<=j} min_{s>=j} of the minimal pooled
// quantile over groups r..s, upper_j the min-max of the maximal pooled
// quantile.  Both evaluation orders are computed and must coincide.  The
// full pooled-quantile tables take O(m^2 log n) time and O(m^2) memory.
template <typename Level>
QuantileBand quantile_band(const DesignGroups& groups, Level beta) {
  detail::require_unit_level(beta);
  const std::size_t m = groups.num_groups();
  const std::vector<double> values = groups.distinct_responses();
  std::vector<double> L(m * m), U(m * m);

  detail::RankSelector ranks(values.size());
  for (std::size_t r = 0; r < m; ++r) {
    ranks.clear();
    std::int64_t w = 0;
    for (std::size_t s = r; s < m; ++s) {
      for (double y : groups.responses(s)) {
        const auto rank = static_cast<std::size_t>(
            std::lower_bound(values.begin(), values.end(), y) - values.begin());
        ranks.add(rank);
      }
      w += groups.weights()[s];
      const auto cl = detail::level_count(w, beta, QuantileSide::minimal);
      const auto cu = detail::level_count(w, beta, QuantileSide::maximal);
      L[r * m + s] = values[ranks.select(cl)];
      U[r * m + s] = values[ranks.select(cu)];
    }
  }
  SolutionBand band = detail::band_from_tables(L, U, m, 0.0);

  QuantileBand out;
  if constexpr (std::is_same_v<Level, Ratio>)
    out.beta = static_cast<double>(beta.num) / static_cast<double>(beta.den);
  else
    out.beta = beta;
  out.xs = groups.xs();
  out.lower = std::move(band.lower);
  out.upper = std::move(band.upper);

  // structural invariants; a violation indicates a bug, not bad input
  for (std::size_t j = 0; j < m; ++j) {
    if (j > 0 && (out.lower[j - 1] > out.lower[j] || out.upper[j - 1] > out.upper[j]))
      throw std::logic_error("quantile_band: band not isotonic");
    if (out.lower[j] > out.upper[j])
      throw std::logic_error("quantile_band: lower exceeds upper");
    const auto& resp = groups.responses(j);
    auto it = std::upper_bound(resp.begin(), resp.end(), out.lower[j]);
    if (it != resp.end() && *it < out.upper[j])
      throw std::logic_error("quantile_band: data point inside open band");
  }
  return out;
}

// Row-wise minimal/maximal quantiles of the fitted CDF family.  By the
// band/plug-in identity these equal quantile_band applied to the same data,
// exactly.
template <typename Level>
QuantileBand plugin_quantiles(const CdfFamilyFit& fit, Level beta) {
  detail::require_unit_level(beta);
  const std::size_t m = fit.num_design_points();
  const std::size_t l = fit.num_thresholds();
  QuantileBand out;
  if constexpr (std::is_same_v<Level, Ratio>)
    out.beta = static_cast<double>(beta.num) / static_cast<double>(beta.den);
  else
    out.beta = beta;
  out.xs = fit.xs();
  out.lower.resize(m);
  out.upper.resize(m);
  // Column values are non-increasing in j and non-decreasing in k, so for a
  // fixed level the prefix of rows at-or-above it only grows with k; one
  // sweep over columns assigns each row its first crossing threshold.
  for (QuantileSide side : {QuantileSide::minimal, QuantileSide::maximal}) {
    auto& dest = side == QuantileSide::minimal ? out.lower : out.upper;
    std::size_t frontier = 0;
    for (std::size_t k = 0; k < l && frontier < m; ++k) {
      const std::size_t reach = fit.column_prefix_at_level(k, beta, side);
      for (std::size_t j = frontier; j < reach; ++j) dest[j] = fit.thresholds()[k];
      frontier = std::max(frontier, reach);
    }
    if (frontier != m)
      throw std::logic_error("plugin_quantiles: incomplete column sweep");
  }
  return out;
}

// Piecewise-linear quantile curve through the band: knot values minimize
// sum_j (q_{j+1}-q_j)^2 / (x_{j+1}-x_j) subject to lower_j <= q_j <= upper_j.
// Solved by cyclic coordinate minimization; each update is the
// energy-weighted average of the neighbours clipped to the box, iterated to
// max-update < 1e-12 (or 1e5 sweeps).  The solution of this convex problem
// is isotonic whenever the band is; that is asserted, not assumed.
inline std::vector<double> smooth_band_curve(const QuantileBand& band,
                                             std::span<const double> xs) {
  const std::size_t m = band.lower.size();
  if (band.upper.size() != m || xs.size() != m || m == 0)
    throw std::invalid_argument("smooth_band_curve: inconsistent inputs");
  for (std::size_t j = 0; j < m; ++j)
    if (!(band.lower[j] <= band.upper[j]))
      throw std::invalid_argument("smooth_band_curve: infeasible band");
  auto clampj = [&](std::size_t j, double v) {
    return std::clamp(v, band.lower[j], band.upper[j]);
  };
  std::vector<double> q(m);
  for (std::size_t j = 0; j < m; ++j)
    q[j] = 0.5 * (band.lower[j] + band.upper[j]);
  if (m == 1) return q;
  std::vector<double> invh(m - 1);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double h = xs[j + 1] - xs[j];
    if (!(h > 0.0))
      throw std::invalid_argument("smooth_band_curve: knots not increasing");
    invh[j] = 1.0 / h;
  }
  for (int sweep = 0; sweep < 100'000; ++sweep) {
    double max_update = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double v;
      if (j == 0)
        v = q[1];
      else if (j + 1 == m)
        v = q[m - 2];
      else
        v = (invh[j - 1] * q[j - 1] + invh[j] * q[j + 1]) / (invh[j - 1] + invh[j]);
      v = clampj(j, v);
      max_update = std::max(max_update, std::abs(v - q[j]));
      q[j] = v;
    }
    if (max_update < 1e-12) break;
  }
  for (std::size_t j = 0; j + 1 < m; ++j)
    if (q[j] > q[j + 1] + 1e-12)
      throw std::runtime_error("smooth_band_curve: solver output not isotonic");
  for (std::size_t j = 0; j + 1 < m; ++j) q[j + 1] = std::max(q[j + 1], q[j]);
  return q;
}

// Quantile shift bounds: with ||F - G||_inf <= delta < 1 and
// delta < beta < 1 - delta, both
//   G^{-1}(beta)  >= F^{-1}(beta - delta)   and
//   G^{-1}(beta+) <= F^{-1}((beta + delta)+)
// hold; the function validates the preconditions (errors on violation) and
// returns the truth of the conjunction.
inline bool quantile_shift_bounds(const StepCdf& f, const StepCdf& g,
                                  double beta, double delta) {
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("quantile_shift_bounds: need 0 <= delta < 1");
  if (!(delta < beta && beta < 1.0 - delta))
    throw std::invalid_argument("quantile_shift_bounds: need delta < beta < 1 - delta");
  if (sup_distance(f, g) > delta)
    throw std::invalid_argument("quantile_shift_bounds: sup distance exceeds delta");
  // round the query levels away from beta so they stay on the guaranteed
  // side of the exact real levels beta -/+ delta
  const double lo = std::max(std::nextafter(beta - delta, 0.0),
                             std::numeric_limits<double>::min());
  const double hi = std::min(std::nextafter(beta + delta, 1.0),
                             1.0 - std::numeric_limits<double>::epsilon() / 2);
  return g.quantile(beta, QuantileSide::minimal) >=
             f.quantile(lo, QuantileSide::minimal) &&
         g.quantile(beta, QuantileSide::maximal) <=
             f.quantile(hi, QuantileSide::maximal);
}

// Lipschitz bound for quantile functions under the growth condition with
// constant kappa on (beta1, beta2):  |Q(beta) - Q(beta')| <= |beta - beta'| / kappa.
inline bool quantile_lipschitz_check(const std::function<double(double)>& quantile_fn,
                                     double beta, double beta_prime, double kappa,
                                     double beta1, double beta2) {
  if (!(kappa > 0.0)) throw std::invalid_argument("quantile_lipschitz_check: kappa <= 0");
  if (!(beta1 < beta && beta < beta2 && beta1 < beta_prime && beta_prime < beta2))
    throw std::invalid_argument("quantile_lipschitz_check: levels outside (beta1, beta2)");
  const double lhs = std::abs(quantile_fn(beta) - quantile_fn(beta_prime));
  const double rhs = std::abs(beta - beta_prime) / kappa;
  return lhs <= rhs + 1e-12 * std::max(1.0, rhs);
}

inline bool quantile_lipschitz_check(const StepCdf& f, double beta, double beta_prime,
                                     double kappa, double beta1, double beta2) {
  return quantile_lipschitz_check(
      [&](double b) { return f.quantile(b, QuantileSide::minimal); }, beta,
      beta_prime, kappa, beta1, beta2);
}

// JSON schema: {beta, xs, lower, upper}.
inline nlohmann::json to_json(const QuantileBand& band) {
  nlohmann::json j;
  j["beta"] = band.beta;
  j["xs"] = band.xs;
  j["lower"] = band.lower;
  j["upper"] = band.upper;
  return j;
}

}  // namespace isocdf
