#pragma once

// Fit of the whole family of conditional CDFs over design points x_1..x_m and
// thresholds y_1..y_l (the distinct responses): column k is the antitonic
// least-squares projection of the raw per-group CDF values at threshold y_k,
// weighted by the group sizes.
//
// Columns are computed by PAVA on integer (count, weight) pairs, so every
// fitted entry is an exact rational pooled value.  Storage is one run-length
// list per column: fitted columns are piecewise constant in j, and for unit
// weights the raw targets are 0/1 indicators, so runs stay short even when
// m = n.  A dense m*l matrix view is available through value(j, k).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "isocdf/design.hpp"
#include "isocdf/step_cdf.hpp"

namespace isocdf {

enum class Interpolation { linear, step_left, step_right };

inline std::string to_string(Interpolation mode) {
  switch (mode) {
    case Interpolation::linear: return "linear";
    case Interpolation::step_left: return "step_left";
    case Interpolation::step_right: return "step_right";
  }
  throw std::logic_error("unknown interpolation mode");
}

inline Interpolation interpolation_from_string(const std::string& s) {
  if (s == "linear") return Interpolation::linear;
  if (s == "step_left" || s == "step-left") return Interpolation::step_left;
  if (s == "step_right" || s == "step-right") return Interpolation::step_right;
  throw std::invalid_argument("unknown interpolation mode: " + s);
}

class CdfFamilyFit {
 public:
  // One maximal constant run of a fitted column: rows [begin_j, end_j) all
  // carry the pooled value num/den.
  struct Run {
    std::int32_t end_j;
    std::int64_t num;
    std::int64_t den;
    double value;
  };

  CdfFamilyFit(std::vector<double> xs, std::vector<std::int64_t> weights,
               std::vector<double> thresholds,
               std::vector<std::vector<Run>> columns, Interpolation interp,
               std::optional<DesignGroups> groups = std::nullopt)
      : xs_(std::move(xs)),
        weights_(std::move(weights)),
        thresholds_(std::move(thresholds)),
        columns_(std::move(columns)),
        interp_(interp),
        groups_(std::move(groups)) {}

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<std::int64_t>& weights() const { return weights_; }
  const std::vector<double>& thresholds() const { return thresholds_; }
  std::size_t num_design_points() const { return xs_.size(); }
  std::size_t num_thresholds() const { return thresholds_.size(); }
  Interpolation interpolation() const { return interp_; }
  void set_interpolation(Interpolation mode) { interp_ = mode; }
  const std::vector<Run>& column_runs(std::size_t k) const { return columns_[k]; }

  bool has_groups() const { return groups_.has_value(); }
  // Raw grouped data; only available for fits built in-process.
  const DesignGroups& groups() const {
    if (!groups_)
      throw std::logic_error("CdfFamilyFit: raw data not available (loaded fit)");
    return *groups_;
  }

  // Matrix entry F_hat_{x_j}(y_k).
  double value(std::size_t j, std::size_t k) const {
    return find_run(j, k).value;
  }

  std::pair<std::int64_t, std::int64_t> value_ratio(std::size_t j, std::size_t k) const {
    const Run& r = find_run(j, k);
    return {r.num, r.den};
  }

  // Minimal / maximal beta-quantile of the fitted CDF at design point j.
  // Comparisons against beta are exact on the rational fitted values.
  template <typename Level>
  double row_quantile(std::size_t j, Level beta, QuantileSide side) const {
    detail::require_unit_level(beta);
    if (j >= num_design_points())
      throw std::out_of_range("row_quantile: design index out of range");
    auto reached = [&](std::size_t k) {
      const Run& r = find_run(j, k);
      const int c = detail::compare_ratio(r.num, r.den, beta);
      return side == QuantileSide::minimal ? c >= 0 : c > 0;
    };
    std::size_t lo = 0, hi = thresholds_.size() - 1;  // last column is all ones
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (reached(mid))
        hi = mid;
      else
        lo = mid + 1;
    }
    return thresholds_[lo];
  }

  // For a fixed level beta, the number of leading rows with value >= beta
  // (side minimal) or > beta (side maximal) in column k.  Columns are
  // non-increasing in j, so this prefix length fully describes the column's
  // comparison against beta.
  template <typename Level>
  std::size_t column_prefix_at_level(std::size_t k, Level beta, QuantileSide side) const {
    const auto& runs = columns_[k];
    auto above = [&](const Run& r) {
      const int c = detail::compare_ratio(r.num, r.den, beta);
      return side == QuantileSide::minimal ? c >= 0 : c > 0;
    };
    // runs have non-increasing values: find the last run still above beta
    std::size_t lo = 0, hi = runs.size();
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (above(runs[mid]))
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo == 0 ? 0 : static_cast<std::size_t>(runs[lo - 1].end_j);
  }

  // Extrapolated estimator F_hat_x(y) for arbitrary (x, y).
  double evaluate(double x, double y) const {
    if (std::isnan(x) || std::isnan(y))
      throw std::invalid_argument("evaluate: NaN query");
    auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), y);
    if (it == thresholds_.begin()) return 0.0;
    const std::size_t k = static_cast<std::size_t>(it - thresholds_.begin()) - 1;
    if (x <= xs_.front()) return value(0, k);
    if (x >= xs_.back()) return value(xs_.size() - 1, k);
    const auto xit = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t jr = static_cast<std::size_t>(xit - xs_.begin());
    const std::size_t jl = jr - 1;
    if (xs_[jl] == x) return value(jl, k);
    switch (interp_) {
      case Interpolation::step_left: return value(jl, k);
      case Interpolation::step_right: return value(jr, k);
      case Interpolation::linear: {
        const double t = (x - xs_[jl]) / (xs_[jr] - xs_[jl]);
        return (1.0 - t) * value(jl, k) + t * value(jr, k);
      }
    }
    throw std::logic_error("unknown interpolation mode");
  }

 private:
  const Run& find_run(std::size_t j, std::size_t k) const {
    if (k >= columns_.size() || j >= num_design_points())
      throw std::out_of_range("CdfFamilyFit: index out of range");
    const auto& runs = columns_[k];
    auto it = std::partition_point(runs.begin(), runs.end(), [&](const Run& r) {
      return static_cast<std::size_t>(r.end_j) <= j;
    });
    return *it;
  }

  std::vector<double> xs_;
  std::vector<std::int64_t> weights_;
  std::vector<double> thresholds_;
  std::vector<std::vector<Run>> columns_;
  Interpolation interp_;
  std::optional<DesignGroups> groups_;
};

// Per-threshold antitonic least squares over all thresholds.  Cost is
// O(n log n) for sorting plus O(m) per threshold.
inline CdfFamilyFit fit_cdf_family(const DesignGroups& groups,
                                   Interpolation interp = Interpolation::linear) {
  const std::size_t m = groups.num_groups();
  const std::vector<double> thresholds = groups.distinct_responses();
  const std::size_t l = thresholds.size();
  const auto& weights = groups.weights();

  std::vector<std::vector<CdfFamilyFit::Run>> columns(l);
  std::vector<std::int64_t> counts(m, 0);   // counts[j] = #{responses_j <= y_k}
  std::vector<std::size_t> cursor(m, 0);

  // PAVA blocks for the antitonic fit, built over reversed indices so the
  // problem is isotonic.  Means are exact rationals (sum of counts) / (sum
  // of weights); violations are detected by cross-multiplication.
  struct Block {
    std::int64_t num;
    std::int64_t den;
    std::size_t end;  // number of reversed indices covered so far
  };
  std::vector<Block> blocks;
  blocks.reserve(m);

  for (std::size_t k = 0; k < l; ++k) {
    const double y = thresholds[k];
    for (std::size_t j = 0; j < m; ++j) {
      const auto& resp = groups.responses(j);
      std::size_t c = cursor[j];
      while (c < resp.size() && resp[c] <= y) ++c;
      cursor[j] = c;
      counts[j] = static_cast<std::int64_t>(c);
    }
    blocks.clear();
    for (std::size_t rj = 0; rj < m; ++rj) {
      const std::size_t j = m - 1 - rj;  // reversed traversal
      blocks.push_back({counts[j], weights[j], rj + 1});
      while (blocks.size() > 1) {
        const Block& b = blocks.back();
        const Block& a = blocks[blocks.size() - 2];
        if (static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den)
          break;  // means already increasing
        Block merged{a.num + b.num, a.den + b.den, b.end};
        blocks.pop_back();
        blocks.back() = merged;
      }
    }
    // un-reverse: block i covers reversed indices [start_i, end_i), i.e.
    // original rows [m - end_i, m - start_i).  Walk blocks backwards to get
    // ascending rows; adjacent runs with equal rational value are merged.
    auto& runs = columns[k];
    runs.reserve(blocks.size());
    for (std::size_t i = blocks.size(); i-- > 0;) {
      const std::size_t start_rev = (i == 0) ? 0 : blocks[i - 1].end;
      const std::int32_t end_j = static_cast<std::int32_t>(m - start_rev);
      const Block& b = blocks[i];
      if (!runs.empty() && static_cast<__int128>(runs.back().num) * b.den ==
                               static_cast<__int128>(b.num) * runs.back().den) {
        runs.back().end_j = end_j;
      } else {
        runs.push_back({end_j, b.num, b.den,
                        static_cast<double>(b.num) / static_cast<double>(b.den)});
      }
    }
  }
  return CdfFamilyFit(groups.xs(), groups.weights(), thresholds, std::move(columns),
                      interp, groups);
}

// Direct evaluation of the min-max formula from pooled CDF values at
// threshold k: min over r <= j of max over s >= j of the pooled mean, and
// the reverse order.  Both orders must agree to 1e-12; used as an
// independent check of the fitted values.  Requires the raw data.
inline double minmax_verify(const CdfFamilyFit& fit, std::size_t j, std::size_t k) {
  const DesignGroups& groups = fit.groups();
  const std::size_t m = groups.num_groups();
  if (j >= m || k >= fit.num_thresholds())
    throw std::out_of_range("minmax_verify: index out of range");
  const double y = fit.thresholds()[k];
  std::vector<double> pc(m + 1, 0.0);  // prefix counts of responses <= y
  std::vector<double> pw(m + 1, 0.0);
  for (std::size_t t = 0; t < m; ++t) {
    const auto& resp = groups.responses(t);
    const auto cnt = std::upper_bound(resp.begin(), resp.end(), y) - resp.begin();
    pc[t + 1] = pc[t] + static_cast<double>(cnt);
    pw[t + 1] = pw[t] + static_cast<double>(groups.weights()[t]);
  }
  auto pooled = [&](std::size_t r, std::size_t s) {
    return (pc[s + 1] - pc[r]) / (pw[s + 1] - pw[r]);
  };
  double minmax = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r <= j; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t s = j; s < m; ++s) mx = std::max(mx, pooled(r, s));
    minmax = std::min(minmax, mx);
  }
  double maxmin = -std::numeric_limits<double>::infinity();
  for (std::size_t s = j; s < m; ++s) {
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r <= j; ++r) mn = std::min(mn, pooled(r, s));
    maxmin = std::max(maxmin, mn);
  }
  if (!(std::abs(minmax - maxmin) <= 1e-12))
    throw std::runtime_error("minmax_verify: evaluation orders disagree");
  return minmax;
}

// JSON schema: {xs, weights, thresholds, values (row-major), interpolation}.
inline nlohmann::json to_json(const CdfFamilyFit& fit) {
  nlohmann::json j;
  j["xs"] = fit.xs();
  j["weights"] = fit.weights();
  j["thresholds"] = fit.thresholds();
  std::vector<double> values;
  values.reserve(fit.num_design_points() * fit.num_thresholds());
  for (std::size_t r = 0; r < fit.num_design_points(); ++r)
    for (std::size_t k = 0; k < fit.num_thresholds(); ++k)
      values.push_back(fit.value(r, k));
  j["values"] = values;
  j["interpolation"] = to_string(fit.interpolation());
  return j;
}

// Rebuild a fit from its JSON form.  Runs are recovered from adjacent equal
// values; a run's denominator is the total weight it covers (PAVA blocks are
// contiguous, and equal-valued adjacent blocks pool to the same rational),
// so the exact rational entries are recoverable from the rounded decimals.
inline CdfFamilyFit cdf_fit_from_json(const nlohmann::json& j) {
  std::vector<double> xs = j.at("xs").get<std::vector<double>>();
  std::vector<std::int64_t> weights = j.at("weights").get<std::vector<std::int64_t>>();
  std::vector<double> thresholds = j.at("thresholds").get<std::vector<double>>();
  std::vector<double> values = j.at("values").get<std::vector<double>>();
  const Interpolation interp = interpolation_from_string(j.at("interpolation"));
  const std::size_t m = xs.size();
  const std::size_t l = thresholds.size();
  if (weights.size() != m || values.size() != m * l || m == 0 || l == 0)
    throw std::invalid_argument("cdf_fit_from_json: inconsistent dimensions");
  std::vector<std::vector<CdfFamilyFit::Run>> columns(l);
  for (std::size_t k = 0; k < l; ++k) {
    auto& runs = columns[k];
    std::size_t j1 = 0;
    while (j1 < m) {
      std::size_t j2 = j1 + 1;
      const double v = values[j1 * l + k];
      std::int64_t den = weights[j1];
      while (j2 < m && values[j2 * l + k] == v) {
        den += weights[j2];
        ++j2;
      }
      const auto num = std::llround(v * static_cast<double>(den));
      runs.push_back({static_cast<std::int32_t>(j2), num, den,
                      static_cast<double>(num) / static_cast<double>(den)});
      j1 = j2;
    }
  }
  return CdfFamilyFit(std::move(xs), std::move(weights), std::move(thresholds),
                      std::move(columns), interp);
}

}  // namespace isocdf
