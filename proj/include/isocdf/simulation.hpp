#pragma once

// Triangular-array simulation harness: generates designs and responses from
// a conditional family, fits the CDF family estimator, measures sup-norm
// estimation errors over the shrinking index sets of the rate schedules, and
// fits empirical convergence rates.
//
// Sup errors are exact for the step extrapolation modes: the fitted surface
// is piecewise constant on rectangles (column runs in x, threshold cells in
// y) while the truth is monotone in each argument, so the supremum over a
// rectangle is attained at two of its corners.  Linear extrapolation falls
// back to a refinement grid in x with documented O(grid^-1) slack.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "isocdf/cdf_fit.hpp"
#include "isocdf/design.hpp"
#include "isocdf/families.hpp"
#include "isocdf/quantile_fit.hpp"
#include "isocdf/random.hpp"

namespace isocdf {

enum class DesignKind { fixed_equispaced, iid_uniform };
enum class QuantileEstimator { lower_band, upper_band, smooth_curve };

struct SimConfig {
  std::string family = "gaussian_shift";
  DesignKind design = DesignKind::fixed_equispaced;
  double a = 0.0;  // interval I = [a, b]
  double b = 1.0;
  double c2 = 0.2;     // design density constant (any C2 < 1 is valid for the
                       // fixed equispaced design; a conservative promise keeps
                       // the level trim C moderate at desk-scale n)
  double c3 = 0.75;    // bandwidth constant in delta_n
  double big_d = 1.5;  // D > 1 in the M_n threshold (config knob)
  double beta1 = 0.05;
  double beta2 = 0.95;
  std::uint64_t seed = 1;
  int reps = 20;
  Interpolation interp = Interpolation::step_right;
  QuantileEstimator estimator = QuantileEstimator::lower_band;
  int beta_grid = 61;       // quantile levels per B_n sweep
  int x_refine = 10;        // x refinement per design gap (linear mode only)
  double x_o = 0.5;         // interior point for the pointwise errors
  bool compute_mn = false;  // max scaled pooled deviation per trial

  const ConditionalFamily& fam() const { return family_by_name(family); }
  double alpha() const { return fam().alpha; }
  double c1() const { return fam().c1; }
  double kappa() const { return fam().growth_kappa(beta1, beta2); }
  // C(C1, C2, C3) from the uniform rate bound, with D as configured
  double rate_constant() const {
    return std::sqrt(c2 * big_d / c3) + c1() * std::pow(c3, alpha());
  }
};

// Derived sequences for sample size n.  The uniform schedule uses
// rho_n = log(n)/n; the pointwise schedule replaces rho_n by 1/n (no log
// factor).
struct RateSchedule {
  std::int64_t n = 0;
  double rho = 0.0;      // log(n)/n
  double delta = 0.0;    // C3 * rho^{1/(2a+1)}
  double cap_delta = 0.0;  // C * rho^{a/(2a+1)}
  double i_lo = 0.0, i_hi = 0.0;  // I_n = {x : [x +- delta] in I}
  double b_lo = 0.0, b_hi = 0.0;  // B_n = (beta1 + Delta, beta2 - Delta)

  bool interval_ok() const { return i_lo < i_hi; }
  bool levels_ok() const { return b_lo < b_hi; }
};

inline RateSchedule uniform_schedule(const SimConfig& cfg, std::int64_t n) {
  if (n < 2) throw std::invalid_argument("schedule: need n >= 2");
  RateSchedule s;
  s.n = n;
  s.rho = std::log(static_cast<double>(n)) / static_cast<double>(n);
  const double expo = 1.0 / (2.0 * cfg.alpha() + 1.0);
  s.delta = cfg.c3 * std::pow(s.rho, expo);
  s.cap_delta = cfg.rate_constant() * std::pow(s.rho, cfg.alpha() * expo);
  s.i_lo = cfg.a + s.delta;
  s.i_hi = cfg.b - s.delta;
  s.b_lo = cfg.beta1 + s.cap_delta;
  s.b_hi = cfg.beta2 - s.cap_delta;
  return s;
}

inline RateSchedule pointwise_schedule(const SimConfig& cfg, std::int64_t n) {
  if (n < 2) throw std::invalid_argument("schedule: need n >= 2");
  RateSchedule s;
  s.n = n;
  s.rho = 1.0 / static_cast<double>(n);
  const double expo = 1.0 / (2.0 * cfg.alpha() + 1.0);
  s.delta = cfg.c3 * std::pow(s.rho, expo);
  s.cap_delta = cfg.rate_constant() * std::pow(s.rho, cfg.alpha() * expo);
  s.i_lo = cfg.a + s.delta;
  s.i_hi = cfg.b - s.delta;
  s.b_lo = cfg.beta1 + s.cap_delta;
  s.b_hi = cfg.beta2 - s.cap_delta;
  return s;
}

// One simulated data set.  Fixed design: X_i = a + (i/n)(b - a), i = 1..n.
// Random design: X_i iid uniform on [a, b].  Responses are drawn from the
// family by inversion; the stream is derived from (seed, n, rep), so results
// do not depend on scheduling.
inline DesignGroups generate_trial(const SimConfig& cfg, std::int64_t n, int rep = 0) {
  if (n < 2) throw std::invalid_argument("generate_trial: need n >= 2");
  CounterRng rng(cfg.seed, static_cast<std::uint64_t>(n) * 1'000'003ULL +
                               static_cast<std::uint64_t>(rep));
  const ConditionalFamily& fam = cfg.fam();
  std::vector<Observation> obs(static_cast<std::size_t>(n));
  for (std::int64_t i = 1; i <= n; ++i) {
    double x;
    if (cfg.design == DesignKind::fixed_equispaced)
      x = cfg.a + (static_cast<double>(i) / static_cast<double>(n)) * (cfg.b - cfg.a);
    else
      x = cfg.a + rng.uniform() * (cfg.b - cfg.a);
    obs[static_cast<std::size_t>(i - 1)] = {x, fam.sample(x, rng)};
  }
  return group_by_design(obs);
}

// Checks the design density condition: every interval of length >= delta
// inside [a, b] holds at least c2 * n * length design points.  Candidate
// windows start at a or just after a design point.
inline bool design_density_ok(std::span<const double> xs_sorted, double a, double b,
                              double delta, double c2) {
  if (!(delta > 0.0) || !(b - a >= delta)) return false;
  const double n = static_cast<double>(xs_sorted.size());
  auto count_in = [&](double lo, double hi) {
    const auto l = std::lower_bound(xs_sorted.begin(), xs_sorted.end(), lo);
    const auto h = std::upper_bound(xs_sorted.begin(), xs_sorted.end(), hi);
    return static_cast<double>(h - l);
  };
  if (count_in(a, a + delta) < c2 * n * delta) return false;
  if (count_in(b - delta, b) < c2 * n * delta) return false;
  for (double x : xs_sorted) {
    if (x < a || x + delta > b) continue;
    // window starting just after x
    const double cnt = count_in(std::nextafter(x, b), x + delta);
    if (cnt < c2 * n * delta) return false;
  }
  return true;
}

namespace detail {

struct RunExtent {
  double lo, hi;
  bool lo_open, hi_open;
};

// x-interval on which the step-extrapolated estimator uses rows [j1, j2).
inline RunExtent run_x_extent(const std::vector<double>& xs, std::size_t j1,
                              std::size_t j2, Interpolation mode) {
  const std::size_t m = xs.size();
  const double neg = -std::numeric_limits<double>::infinity();
  const double pos = std::numeric_limits<double>::infinity();
  if (mode == Interpolation::step_right) {
    // x maps to the nearest design point at or to the right (clamped);
    // the extent is (xs[j1-1], xs[j2-1]]
    return {j1 == 0 ? neg : xs[j1 - 1], j2 == m ? pos : xs[j2 - 1], j1 != 0, false};
  }
  // step_left: x maps to the nearest design point at or to the left
  // (clamped); the extent is [xs[j1], xs[j2])
  return {j1 == 0 ? neg : xs[j1], j2 == m ? pos : xs[j2], false, j2 != m};
}

// Clamp the extent to [i_lo, i_hi] and return evaluation points; for open
// endpoints the point is nudged one ulp into the interval so that a step
// truth is sampled on the correct side.  Returns false if the intersection
// is empty.
inline bool clamp_extent(const RunExtent& e, double i_lo, double i_hi,
                         bool nudge_open, double& xa, double& xb) {
  xa = std::max(e.lo, i_lo);
  xb = std::min(e.hi, i_hi);
  if (xa > xb) return false;
  if (nudge_open) {
    if (e.lo_open && xa == e.lo) xa = std::nextafter(xa, xb);
    if (e.hi_open && xb == e.hi) xb = std::nextafter(xb, xa);
    if (xa > xb) return false;
  }
  return true;
}

}  // namespace detail

// Truth wrapper around a fitted family, for self-consistency checks: the
// CDF is the extrapolated estimator and quantiles are read off the same
// exact row machinery (step modes) or by bisection over thresholds (linear).
inline ConditionalFamily family_from_fit(const CdfFamilyFit& fit) {
  ConditionalFamily fam;
  fam.name = "fitted";
  fam.alpha = 1.0;
  fam.c1 = std::numeric_limits<double>::quiet_NaN();
  fam.cdf = [fit](double x, double y) { return fit.evaluate(x, y); };
  fam.quantile = [fit](double x, double beta) {
    const auto& xs = fit.xs();
    if (fit.interpolation() != Interpolation::linear) {
      std::size_t j;
      if (x <= xs.front())
        j = 0;
      else if (x >= xs.back())
        j = xs.size() - 1;
      else {
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t jr = static_cast<std::size_t>(it - xs.begin());
        j = (xs[jr - 1] == x || fit.interpolation() == Interpolation::step_left)
                ? jr - 1
                : jr;
      }
      return fit.row_quantile(j, beta, QuantileSide::minimal);
    }
    const auto& ys = fit.thresholds();
    std::size_t lo = 0, hi = ys.size() - 1;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (fit.evaluate(x, ys[mid]) >= beta)
        hi = mid;
      else
        lo = mid + 1;
    }
    return ys[lo];
  };
  fam.growth_kappa = [](double, double) { return std::numeric_limits<double>::quiet_NaN(); };
  return fam;
}

// sup over x in [i_lo, i_hi], y in [j_lo, j_hi] of |F_hat_x(y) - F_x(y)|.
// Exact for the step extrapolation modes when the truth CDF is continuous
// in y; linear mode evaluates on design points plus `x_refine` interior
// points per gap.  Pass continuous_truth = false when the truth is itself a
// step family on the same thresholds (e.g. family_from_fit), in which case
// only right values at the thresholds are compared.
inline double sup_error_cdf(const CdfFamilyFit& fit, const ConditionalFamily& fam,
                            double i_lo, double i_hi,
                            double j_lo = -std::numeric_limits<double>::infinity(),
                            double j_hi = std::numeric_limits<double>::infinity(),
                            int x_refine = 10, bool continuous_truth = true) {
  if (!(i_lo <= i_hi)) throw std::invalid_argument("sup_error_cdf: n too small for schedule");
  const auto& xs = fit.xs();
  const auto& ys = fit.thresholds();
  const std::size_t l = ys.size();
  auto truth = [&](double x, double y) {
    if (y == std::numeric_limits<double>::infinity()) return 1.0;
    if (y == -std::numeric_limits<double>::infinity()) return 0.0;
    return fam.cdf(x, y);
  };
  double sup = 0.0;
  const Interpolation mode = fit.interpolation();

  if (mode == Interpolation::linear) {
    std::vector<double> grid{i_lo, i_hi};
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (xs[j] >= i_lo && xs[j] <= i_hi) grid.push_back(xs[j]);
      if (j + 1 < xs.size()) {
        for (int t = 1; t < x_refine; ++t) {
          const double x = xs[j] + (xs[j + 1] - xs[j]) * t / x_refine;
          if (x >= i_lo && x <= i_hi) grid.push_back(x);
        }
      }
    }
    for (double x : grid) {
      for (std::size_t k = 0; k < l; ++k) {
        const double y0 = std::max(ys[k], j_lo);
        const double y1 = std::min(k + 1 < l ? ys[k + 1] : std::numeric_limits<double>::infinity(), j_hi);
        if (y0 > y1) continue;
        const double v = fit.evaluate(x, ys[k]);
        sup = std::max(sup, std::abs(v - truth(x, y0)));
        sup = std::max(sup, std::abs(v - truth(x, y1)));
      }
      // below the first threshold the estimator is zero
      const double ytail = std::min(std::nextafter(ys[0], -1e300), j_hi);
      if (ytail >= j_lo) sup = std::max(sup, truth(x, std::min(ys[0], j_hi)));
    }
    return sup;
  }

  // step modes: walk column runs
  for (std::size_t k = 0; k < l; ++k) {
    const double y_bot = std::max(ys[k], j_lo);
    const double y_top =
        std::min(k + 1 < l ? ys[k + 1] : std::numeric_limits<double>::infinity(), j_hi);
    if (y_bot > y_top) continue;
    std::size_t j1 = 0;
    for (const auto& run : fit.column_runs(k)) {
      const std::size_t j2 = static_cast<std::size_t>(run.end_j);
      const auto extent = detail::run_x_extent(xs, j1, j2, mode);
      j1 = j2;
      double xa, xb;
      if (!detail::clamp_extent(extent, i_lo, i_hi, !continuous_truth, xa, xb))
        continue;
      if (continuous_truth) {
        // truth is largest at (xa, y_top-) and smallest at (xb, y_bot)
        sup = std::max(sup, truth(xa, y_top) - run.value);
        sup = std::max(sup, run.value - truth(xb, y_bot));
      } else {
        sup = std::max(sup, std::abs(truth(xa, y_bot) - run.value));
        sup = std::max(sup, std::abs(truth(xb, y_bot) - run.value));
      }
    }
  }
  // tail below the first threshold: estimator is zero, truth peaks at y1-
  if (continuous_truth && j_lo < ys[0])
    sup = std::max(sup, truth(i_lo, std::min(ys[0], j_hi)));
  return sup;
}

// Plug-in quantile vector at level beta for the requested estimator.
inline std::vector<double> quantile_estimate_vector(const CdfFamilyFit& fit,
                                                    double beta,
                                                    QuantileEstimator which) {
  const QuantileBand band = plugin_quantiles(fit, beta);
  switch (which) {
    case QuantileEstimator::lower_band: return band.lower;
    case QuantileEstimator::upper_band: return band.upper;
    case QuantileEstimator::smooth_curve: return smooth_band_curve(band, band.xs);
  }
  throw std::logic_error("unknown quantile estimator");
}

// sup over x in [i_lo, i_hi] and beta on a grid inside (b_lo, b_hi) of
// |Q_hat_x(beta) - Q_x(beta)|, with step extrapolation of the quantile
// vector in x (exact in x for each grid level).
inline double sup_error_quantile(const CdfFamilyFit& fit, const ConditionalFamily& fam,
                                 double i_lo, double i_hi, double b_lo, double b_hi,
                                 int beta_grid = 61,
                                 QuantileEstimator which = QuantileEstimator::lower_band) {
  if (!(b_lo < b_hi)) throw std::invalid_argument("sup_error_quantile: degenerate level interval");
  if (!(i_lo <= i_hi)) throw std::invalid_argument("sup_error_quantile: n too small for schedule");
  if (beta_grid < 1) throw std::invalid_argument("sup_error_quantile: empty level grid");
  const auto& xs = fit.xs();
  const std::size_t m = xs.size();
  const Interpolation mode = fit.interpolation() == Interpolation::step_left
                                 ? Interpolation::step_left
                                 : Interpolation::step_right;
  double sup = 0.0;
  for (int t = 0; t < beta_grid; ++t) {
    const double beta = b_lo + (b_hi - b_lo) * (t + 1.0) / (beta_grid + 1.0);
    const std::vector<double> q = quantile_estimate_vector(fit, beta, which);
    std::size_t j1 = 0;
    while (j1 < m) {
      std::size_t j2 = j1 + 1;
      while (j2 < m && q[j2] == q[j1]) ++j2;
      const auto extent = detail::run_x_extent(xs, j1, j2, mode);
      double xa, xb;
      if (detail::clamp_extent(extent, i_lo, i_hi, true, xa, xb)) {
        // truth quantile is non-decreasing in x
        sup = std::max(sup, q[j1] - fam.quantile(xa, beta));
        sup = std::max(sup, fam.quantile(xb, beta) - q[j1]);
      }
      j1 = j2;
    }
  }
  return sup;
}

// Single-point sup errors at x_o: (sup_y |F_hat - F|, sup_beta |Q_hat - Q|).
inline std::pair<double, double> pointwise_errors(const CdfFamilyFit& fit,
                                                  const ConditionalFamily& fam,
                                                  double x_o,
                                                  double b_lo, double b_hi,
                                                  int beta_grid = 61) {
  const auto& ys = fit.thresholds();
  const std::size_t l = ys.size();
  double cdf_err = fam.cdf(x_o, ys[0]);  // left limit at the first threshold
  for (std::size_t k = 0; k < l; ++k) {
    const double v = fit.evaluate(x_o, ys[k]);
    cdf_err = std::max(cdf_err, std::abs(v - fam.cdf(x_o, ys[k])));
    const double ynext = k + 1 < l ? ys[k + 1] : std::numeric_limits<double>::infinity();
    const double tnext = k + 1 < l ? fam.cdf(x_o, ynext) : 1.0;
    cdf_err = std::max(cdf_err, std::abs(v - tnext));
  }

  double q_err = 0.0;
  if (!(b_lo < b_hi)) throw std::invalid_argument("pointwise_errors: degenerate level interval");
  auto value_at = [&](std::size_t k) { return fit.evaluate(x_o, ys[k]); };
  for (int t = 0; t < beta_grid; ++t) {
    const double beta = b_lo + (b_hi - b_lo) * (t + 1.0) / (beta_grid + 1.0);
    // minimal quantile of the step CDF y -> F_hat_{x_o}(y)
    std::size_t lo = 0, hi = l - 1;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (value_at(mid) >= beta)
        hi = mid;
      else
        lo = mid + 1;
    }
    q_err = std::max(q_err, std::abs(ys[lo] - fam.quantile(x_o, beta)));
  }
  return {cdf_err, q_err};
}

// M_n = max over group ranges r <= s of sqrt(w_rs) * sup_y |pooled empirical
// CDF - pooled truth|.  Exact over all pairs and all y (right values and
// left limits); block min/max envelopes per prefix row prune pairs that
// cannot beat the running maximum.
inline double max_scaled_deviation(const DesignGroups& groups,
                                   const ConditionalFamily& fam,
                                   int num_threads = 2) {
  const std::size_t m = groups.num_groups();
  const std::vector<double> ys = groups.distinct_responses();
  const std::size_t l = ys.size();
  const std::size_t rows = m + 1;

  // prefix deviations: E right-continuous values, E2 left limits
  std::vector<double> E(rows * l, 0.0), E2(rows * l, 0.0);
  std::vector<double> W(rows, 0.0);
  {
    std::vector<double> ptrue(l);
    for (std::size_t j = 0; j < m; ++j) {
      const auto& resp = groups.responses(j);
      const double w = static_cast<double>(groups.weights()[j]);
      W[j + 1] = W[j] + w;
      const double* prev = &E[j * l];
      const double* prev2 = &E2[j * l];
      double* cur = &E[(j + 1) * l];
      double* cur2 = &E2[(j + 1) * l];
      for (std::size_t k = 0; k < l; ++k) ptrue[k] = w * fam.cdf(groups.xs()[j], ys[k]);
      std::size_t c = 0;
      for (std::size_t k = 0; k < l; ++k) {
        const double chat_prev = static_cast<double>(c);  // count at y_k-
        while (c < resp.size() && resp[c] <= ys[k]) ++c;
        cur[k] = prev[k] + (static_cast<double>(c) - ptrue[k]);
        cur2[k] = prev2[k] + (chat_prev - ptrue[k]);
      }
    }
  }

  // per-row coarse envelopes
  const std::size_t nblocks = std::min<std::size_t>(64, l);
  const std::size_t bsize = (l + nblocks - 1) / nblocks;
  std::vector<double> bmin(rows * nblocks), bmax(rows * nblocks);
  std::vector<double> bmin2(rows * nblocks), bmax2(rows * nblocks);
  std::vector<double> gmin(rows), gmax(rows), gmin2(rows), gmax2(rows);
  for (std::size_t j = 0; j < rows; ++j) {
    double g0 = std::numeric_limits<double>::infinity(), g1 = -g0;
    double h0 = g0, h1 = -g0;
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
      const std::size_t k0 = blk * bsize;
      const std::size_t k1 = std::min(l, k0 + bsize);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      double lo2 = lo, hi2 = -lo;
      for (std::size_t k = k0; k < k1; ++k) {
        lo = std::min(lo, E[j * l + k]);
        hi = std::max(hi, E[j * l + k]);
        lo2 = std::min(lo2, E2[j * l + k]);
        hi2 = std::max(hi2, E2[j * l + k]);
      }
      bmin[j * nblocks + blk] = lo;
      bmax[j * nblocks + blk] = hi;
      bmin2[j * nblocks + blk] = lo2;
      bmax2[j * nblocks + blk] = hi2;
      g0 = std::min(g0, lo);
      g1 = std::max(g1, hi);
      h0 = std::min(h0, lo2);
      h1 = std::max(h1, hi2);
    }
    gmin[j] = g0;
    gmax[j] = g1;
    gmin2[j] = h0;
    gmax2[j] = h1;
  }

  // Exact max over k for one pair, descending only into k-blocks whose
  // envelope bound can still beat `threshold` (an unscaled target).
  auto scan_pair = [&](std::size_t a, std::size_t b, double threshold) {
    double best = threshold;
    const double* Ea = &E[a * l];
    const double* Eb = &E[b * l];
    const double* Fa = &E2[a * l];
    const double* Fb = &E2[b * l];
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
      const double bub =
          std::max(std::max(bmax[b * nblocks + blk] - bmin[a * nblocks + blk],
                            bmax[a * nblocks + blk] - bmin[b * nblocks + blk]),
                   std::max(bmax2[b * nblocks + blk] - bmin2[a * nblocks + blk],
                            bmax2[a * nblocks + blk] - bmin2[b * nblocks + blk]));
      if (bub <= best) continue;
      const std::size_t k0 = blk * bsize;
      const std::size_t k1 = std::min(l, k0 + bsize);
      for (std::size_t k = k0; k < k1; ++k) {
        best = std::max(best, std::abs(Eb[k] - Ea[k]));
        best = std::max(best, std::abs(Fb[k] - Fa[k]));
      }
    }
    return best;
  };

  // seed with strided pairs at dyadic gaps
  double best = 0.0;
  for (std::size_t gap = 1; gap < rows; gap *= 2)
    for (std::size_t a = 0; a + gap < rows; a += gap)
      best = std::max(best, scan_pair(a, a + gap, 0.0) /
                                std::sqrt(W[a + gap] - W[a]));

  const int nt = std::max(1, num_threads);
  std::vector<double> bests(static_cast<std::size_t>(nt), best);
  std::atomic<std::size_t> next_a{0};
  auto worker = [&](int tid) {
    double local = bests[static_cast<std::size_t>(tid)];
    for (;;) {
      const std::size_t a = next_a.fetch_add(1);
      if (a >= rows - 1) break;
      for (std::size_t b = a + 1; b < rows; ++b) {
        const double w = std::sqrt(W[b] - W[a]);
        const double ub = std::max(std::max(gmax[b] - gmin[a], gmax[a] - gmin[b]),
                                   std::max(gmax2[b] - gmin2[a], gmax2[a] - gmin2[b]));
        if (ub <= local * w) continue;
        local = std::max(local, scan_pair(a, b, local * w) / w);
      }
    }
    bests[static_cast<std::size_t>(tid)] = local;
  };
  if (nt == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (double v : bests) best = std::max(best, v);
  return best;
}

struct TrialResult {
  std::int64_t n = 0;
  int rep = 0;
  double sup_err_cdf = 0.0;
  double sup_err_quantile = 0.0;
  double pointwise_err_cdf = 0.0;
  double pointwise_err_quantile = 0.0;
  double m_n = std::numeric_limits<double>::quiet_NaN();
};

inline TrialResult run_trial(const SimConfig& cfg, std::int64_t n, int rep) {
  const DesignGroups groups = generate_trial(cfg, n, rep);
  const CdfFamilyFit fit = fit_cdf_family(groups, cfg.interp);
  const ConditionalFamily& fam = cfg.fam();
  const RateSchedule su = uniform_schedule(cfg, n);
  const RateSchedule sp = pointwise_schedule(cfg, n);
  if (!su.interval_ok())
    throw std::invalid_argument("run_trial: n too small for schedule");

  TrialResult out;
  out.n = n;
  out.rep = rep;
  out.sup_err_cdf =
      sup_error_cdf(fit, fam, su.i_lo, su.i_hi,
                    -std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(), cfg.x_refine);
  if (su.levels_ok())
    out.sup_err_quantile = sup_error_quantile(fit, fam, su.i_lo, su.i_hi, su.b_lo,
                                              su.b_hi, cfg.beta_grid, cfg.estimator);
  else
    out.sup_err_quantile = std::numeric_limits<double>::quiet_NaN();
  if (sp.levels_ok()) {
    const auto [ce, qe] =
        pointwise_errors(fit, fam, cfg.x_o, sp.b_lo, sp.b_hi, cfg.beta_grid);
    out.pointwise_err_cdf = ce;
    out.pointwise_err_quantile = qe;
  } else {
    out.pointwise_err_cdf = out.pointwise_err_quantile =
        std::numeric_limits<double>::quiet_NaN();
  }
  if (cfg.compute_mn) out.m_n = max_scaled_deviation(groups, fam, 1);
  return out;
}

// All (n, rep) trials; parallel across trials, results in deterministic
// (n-major, rep-minor) order regardless of thread schedule.
inline std::vector<TrialResult> run_study(const SimConfig& cfg,
                                          std::span<const std::int64_t> n_grid,
                                          int num_threads = 2) {
  std::vector<std::pair<std::int64_t, int>> jobs;
  for (std::int64_t n : n_grid)
    for (int rep = 0; rep < cfg.reps; ++rep) jobs.emplace_back(n, rep);
  std::vector<TrialResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed.load()) break;
      try {
        results[i] = run_trial(cfg, jobs[i].first, jobs[i].second);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        failed.store(true);
        error_message = e.what();
      }
    }
  };
  const int nt = std::max(1, num_threads);
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error("run_study: " + error_message);
  return results;
}

struct RateFit {
  double slope = 0.0;       // least-squares slope of log(mean err) on log(n)
  double max_scaled = 0.0;  // max over n of mean err / rate_fn(n)
  double min_scaled = 0.0;
  std::vector<std::int64_t> n_values;
  std::vector<double> mean_errors;
};

template <typename FieldFn, typename RateFn>
RateFit rate_fit(std::span<const TrialResult> results, FieldFn field, RateFn rate_fn) {
  std::vector<std::int64_t> ns;
  std::vector<double> sums;
  std::vector<int> counts;
  for (const TrialResult& r : results) {
    auto it = std::find(ns.begin(), ns.end(), r.n);
    std::size_t i;
    if (it == ns.end()) {
      ns.push_back(r.n);
      sums.push_back(0.0);
      counts.push_back(0);
      i = ns.size() - 1;
    } else {
      i = static_cast<std::size_t>(it - ns.begin());
    }
    sums[i] += field(r);
    counts[i] += 1;
  }
  if (ns.size() < 4)
    throw std::invalid_argument("rate_fit: need at least 4 distinct n values");
  RateFit out;
  out.n_values = ns;
  out.max_scaled = -std::numeric_limits<double>::infinity();
  out.min_scaled = std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double mean = sums[i] / counts[i];
    out.mean_errors.push_back(mean);
    const double lx = std::log(static_cast<double>(ns[i]));
    const double ly = std::log(mean);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    const double scaled = mean / rate_fn(ns[i]);
    out.max_scaled = std::max(out.max_scaled, scaled);
    out.min_scaled = std::min(out.min_scaled, scaled);
  }
  const double k = static_cast<double>(ns.size());
  out.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return out;
}

inline nlohmann::json rate_fit_to_json(const RateFit& fit) {
  nlohmann::json j;
  j["n_values"] = fit.n_values;
  j["mean_errors"] = fit.mean_errors;
  j["slope"] = fit.slope;
  j["max_scaled"] = fit.max_scaled;
  j["min_scaled"] = fit.min_scaled;
  return j;
}

inline SimConfig scenario_by_name(const std::string& name) {
  SimConfig cfg;
  if (name == "gaussian_shift" || name == "smoke") {
    cfg.family = "gaussian_shift";
  } else if (name == "uniform_shift") {
    cfg.family = "uniform_shift";
    cfg.beta1 = 0.05;
    cfg.beta2 = 0.95;
  } else {
    throw std::invalid_argument("unknown scenario: " + name);
  }
  return cfg;
}

}  // namespace isocdf
