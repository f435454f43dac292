#pragma once

// Monte Carlo checks of the exponential inequalities: the DKW-type tail
// bound for the sup distance between an empirical CDF of independent,
// non-identically distributed observations and the average of their CDFs,
// and the law-of-large-numbers tail bound for sup_{n >= n_o} |S_n / n|.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "isocdf/random.hpp"

namespace isocdf {

struct UnivariateDist {
  std::function<double(double)> cdf;
  std::function<double(CounterRng&)> sample;
};

inline UnivariateDist uniform_dist(double lo, double hi) {
  return {[lo, hi](double y) {
            if (y <= lo) return 0.0;
            if (y >= hi) return 1.0;
            return (y - lo) / (hi - lo);
          },
          [lo, hi](CounterRng& rng) { return lo + (hi - lo) * rng.uniform_open(); }};
}

struct ExceedanceResult {
  std::vector<double> eta;
  std::vector<double> frequency;   // fraction of reps at or above eta
  std::int64_t reps = 0;
};

// For each eta: empirical frequency of sqrt(k) * ||F_hat - F_bar||_inf >= eta
// over `reps` simulated samples of size k (one draw from each distribution).
// The sup distance is exact: F_bar is continuous in all supported cases
// only if the inputs are; candidate points are the order statistics, where
// the empirical CDF attains both one-sided extremes.
inline ExceedanceResult dkw_mc(const std::vector<UnivariateDist>& distributions,
                               const std::vector<double>& eta_grid,
                               std::int64_t reps, std::uint64_t seed) {
  const std::size_t k = distributions.size();
  if (k == 0 || reps < 1) throw std::invalid_argument("dkw_mc: empty setup");
  ExceedanceResult out;
  out.eta = eta_grid;
  out.frequency.assign(eta_grid.size(), 0.0);
  out.reps = reps;
  const double sqrtk = std::sqrt(static_cast<double>(k));
  std::vector<double> sample(k);
  std::vector<std::int64_t> hits(eta_grid.size(), 0);
  for (std::int64_t rep = 0; rep < reps; ++rep) {
    CounterRng rng(seed, static_cast<std::uint64_t>(rep));
    for (std::size_t i = 0; i < k; ++i) sample[i] = distributions[i].sample(rng);
    std::sort(sample.begin(), sample.end());
    double d = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double fbar = 0.0;
      for (std::size_t t = 0; t < k; ++t) fbar += distributions[t].cdf(sample[i]);
      fbar /= static_cast<double>(k);
      d = std::max(d, static_cast<double>(i + 1) / static_cast<double>(k) - fbar);
      d = std::max(d, fbar - static_cast<double>(i) / static_cast<double>(k));
    }
    const double stat = sqrtk * d;
    for (std::size_t e = 0; e < eta_grid.size(); ++e)
      if (stat >= eta_grid[e]) ++hits[e];
  }
  for (std::size_t e = 0; e < eta_grid.size(); ++e)
    out.frequency[e] = static_cast<double>(hits[e]) / static_cast<double>(reps);
  return out;
}

// DKW-type tail bound with the universal constant 2^{5/2} e.
inline double dkw_paper_bound(double eta) {
  return std::pow(2.0, 2.5) * std::exp(1.0) * std::exp(-2.0 * eta * eta);
}

// Classical two-sided DKW bound (constant 2), valid for iid samples and a
// reference point for the heterogeneous bound since C4 >= 2.
inline double dkw_classical_bound(double eta) { return 2.0 * std::exp(-2.0 * eta * eta); }

// Bounded centered increment law for the LLN inequality.
struct IncrementLaw {
  std::string name;
  double bound = 1.0;  // |Z_i| <= bound almost surely
  std::function<double(CounterRng&)> sample;
};

// Rademacher scaled to +-1/2: range 1, so the premise
// P(|S_b - S_a| > eta) <= 2 exp(-2 eta^2 / (b-a)) holds with c = 2 (Hoeffding).
inline IncrementLaw rademacher_half_law() {
  return {"rademacher_half", 0.5,
          [](CounterRng& rng) { return rng.next_u64() & 1 ? 0.5 : -0.5; }};
}

// Plain +-1 Rademacher (range 2; satisfies the premise only with c = 1/2).
inline IncrementLaw rademacher_law() {
  return {"rademacher", 1.0,
          [](CounterRng& rng) { return rng.next_u64() & 1 ? 1.0 : -1.0; }};
}

// Empirical exceedance of sup_{n_o <= n <= n_max} |S_n / n| >= eta.  The
// supremum is truncated at n_max, so reported frequencies are lower bounds
// on the untruncated event probability (fine for checking an upper bound).
inline ExceedanceResult lln_exp_mc(std::int64_t n_o, const std::vector<double>& eta_grid,
                                   std::int64_t reps, std::uint64_t seed,
                                   const IncrementLaw& law, std::int64_t n_max) {
  if (n_o < 1 || n_max < n_o || reps < 1)
    throw std::invalid_argument("lln_exp_mc: need 1 <= n_o <= n_max and reps >= 1");
  ExceedanceResult out;
  out.eta = eta_grid;
  out.frequency.assign(eta_grid.size(), 0.0);
  out.reps = reps;
  std::vector<std::int64_t> hits(eta_grid.size(), 0);
  for (std::int64_t rep = 0; rep < reps; ++rep) {
    CounterRng rng(seed, static_cast<std::uint64_t>(rep));
    double s = 0.0;
    double sup = 0.0;
    for (std::int64_t n = 1; n <= n_max; ++n) {
      s += law.sample(rng);
      if (n >= n_o) sup = std::max(sup, std::abs(s) / static_cast<double>(n));
    }
    for (std::size_t e = 0; e < eta_grid.size(); ++e)
      if (sup >= eta_grid[e]) ++hits[e];
  }
  for (std::size_t e = 0; e < eta_grid.size(); ++e)
    out.frequency[e] = static_cast<double>(hits[e]) / static_cast<double>(reps);
  return out;
}

// Constant C' of the LLN tail bound P(sup_{n>=n_o} |S_n/n| >= eta)
//   <= C' exp(-c' n_o eta^2), derived from the premise constants (c, C) and
// the chosen c' < c:  beta = (c/c' + 1)^2 / (4 c/c'),
// p_o = min{1/log(beta), log(4C)},  C' = 2 C (1 + 1/(p_o log(beta))).
inline double lln_tail_constant(double c, double c_prime, double big_c) {
  if (!(c_prime > 0.0 && c_prime < c) || !(big_c >= 1.0))
    throw std::invalid_argument("lln_tail_constant: need 0 < c' < c and C >= 1");
  const double ratio = c / c_prime;
  const double beta = (ratio + 1.0) * (ratio + 1.0) / (4.0 * ratio);
  const double log_beta = std::log(beta);
  const double p_o = std::min(1.0 / log_beta, std::log(4.0 * big_c));
  return 2.0 * big_c * (1.0 + 1.0 / (p_o * log_beta));
}

inline double lln_tail_bound(double c, double c_prime, double big_c,
                             std::int64_t n_o, double eta) {
  return lln_tail_constant(c, c_prime, big_c) *
         std::exp(-c_prime * static_cast<double>(n_o) * eta * eta);
}

}  // namespace isocdf
