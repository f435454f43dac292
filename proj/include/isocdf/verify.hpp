#pragma once

// Randomized verification suites behind the `verify` subcommand: oracle
// equivalences for the isotonic machinery and the quantile band, and Monte
// Carlo checks of the exponential inequalities.  Each suite reports
// per-property trial/failure counts and an overall verdict.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "isocdf/brute_force.hpp"
#include "isocdf/cdf_fit.hpp"
#include "isocdf/design.hpp"
#include "isocdf/isotonic.hpp"
#include "isocdf/mc_bounds.hpp"
#include "isocdf/quantile_fit.hpp"
#include "isocdf/random.hpp"

namespace isocdf {

struct PropertyResult {
  std::string name;
  std::int64_t trials = 0;
  std::int64_t failures = 0;
};

struct SuiteReport {
  std::string suite;
  std::vector<PropertyResult> properties;
  bool passed() const {
    for (const auto& p : properties)
      if (p.failures > 0) return false;
    return true;
  }
};

inline nlohmann::json to_json(const SuiteReport& report) {
  nlohmann::json props = nlohmann::json::array();
  for (const auto& p : report.properties)
    props.push_back({{"name", p.name}, {"trials", p.trials}, {"failures", p.failures}});
  return {{"suite", report.suite}, {"passed", report.passed()}, {"properties", props}};
}

namespace detail {

inline DesignGroups random_verify_groups(CounterRng& rng, std::size_t max_m,
                                         std::size_t max_n) {
  const std::size_t m = 1 + rng.next_u64() % max_m;
  const std::size_t n = std::max(m, 1 + rng.next_u64() % max_n);
  std::vector<Observation> obs(n);
  for (std::size_t i = 0; i < n; ++i) {
    obs[i].x = static_cast<double>(i % m);
    obs[i].y = std::floor(rng.uniform() * 10.0) * 0.5;
  }
  return group_by_design(obs);
}

}  // namespace detail

// Properties of the convex-loss machinery on random pinball instances:
// interval-minimizer partition inequalities, agreement of the two min-max
// evaluation orders, lattice closure of the membership test, extremality of
// the band against grid enumeration, and risk linearity along the band.
inline SuiteReport run_isoreg_suite(std::uint64_t seed, std::int64_t reps) {
  CounterRng rng(seed, 0xA5);
  SuiteReport report;
  report.suite = "isoreg";
  PropertyResult cauchy{"cauchy_mean_value_partitions", 0, 0};
  PropertyResult orders{"minmax_equals_maxmin", 0, 0};
  PropertyResult lattice{"membership_lattice_closure", 0, 0};
  PropertyResult extremal{"band_brackets_brute_force", 0, 0};
  PropertyResult linear{"risk_linear_on_band", 0, 0};
  PropertyResult member{"band_interpolants_are_members", 0, 0};

  for (std::int64_t rep = 0; rep < reps; ++rep) {
    const DesignGroups g = detail::random_verify_groups(rng, 4, 8);
    const std::size_t m = g.num_groups();
    const double beta = 0.1 + 0.8 * rng.uniform();
    const PinballOracle oracle(g, beta);

    {
      ++cauchy.trials;
      const std::size_t a = rng.next_u64() % m;
      const std::size_t b = a + rng.next_u64() % (m - a);
      std::vector<std::size_t> cuts{a};
      for (std::size_t j = a; j < b; ++j)
        if (rng.uniform() < 0.5) cuts.push_back(j + 1);
      cuts.push_back(b + 1);
      if (cuts.size() >= 3) {
        const auto [lab, uab] = oracle.interval_minimizers(a, b);
        double lmin = 1e300, lmax = -1e300, umin = 1e300, umax = -1e300;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
          const auto [lo, up] = oracle.interval_minimizers(cuts[i], cuts[i + 1] - 1);
          lmin = std::min(lmin, lo);
          lmax = std::max(lmax, lo);
          umin = std::min(umin, up);
          umax = std::max(umax, up);
        }
        if (!(lmin <= lab && lab <= lmax && umin <= uab && uab <= umax))
          ++cauchy.failures;
      }
    }

    SolutionBand band;
    try {
      ++orders.trials;
      band = minmax_band(oracle);  // throws if the two orders disagree
    } catch (const std::exception&) {
      ++orders.failures;
      continue;
    }

    {
      ++member.trials;
      ++lattice.trials;
      auto interpolant = [&](double lambda) {
        std::vector<double> q(m);
        for (std::size_t j = 0; j < m; ++j)
          q[j] = band.lower[j] + lambda * (band.upper[j] - band.lower[j]);
        return q;
      };
      const auto q1 = interpolant(rng.uniform());
      const auto q2 = interpolant(rng.uniform());
      if (!check_membership(oracle, q1) || !check_membership(oracle, q2))
        ++member.failures;
      std::vector<double> qmin(m), qmax(m);
      for (std::size_t j = 0; j < m; ++j) {
        qmin[j] = std::min(q1[j], q2[j]);
        qmax[j] = std::max(q1[j], q2[j]);
      }
      if (!check_membership(oracle, qmin) || !check_membership(oracle, qmax))
        ++lattice.failures;
    }

    {
      ++extremal.trials;
      std::vector<ExplicitLoss> losses(m);
      for (std::size_t j = 0; j < m; ++j)
        for (double y : g.responses(j)) losses[j].pinball.push_back({beta, y});
      const auto bf = brute_force_band(losses, g.distinct_responses());
      bool ok = true;
      for (std::size_t j = 0; j < m; ++j)
        ok = ok && band.lower[j] <= bf.lower[j] + 1e-12 &&
             band.upper[j] >= bf.upper[j] - 1e-12;
      const double tol = 1e-10 * std::max(1.0, std::abs(bf.min_value));
      ok = ok && std::abs(pinball_risk(g, band.lower, beta).value - bf.min_value) <= tol;
      ok = ok && std::abs(pinball_risk(g, band.upper, beta).value - bf.min_value) <= tol;
      if (!ok) ++extremal.failures;
    }

    {
      ++linear.trials;
      const double r0 = pinball_risk(g, band.lower, beta).value;
      const double lambda = rng.uniform();
      std::vector<double> mix(m);
      for (std::size_t j = 0; j < m; ++j)
        mix[j] = band.lower[j] + lambda * (band.upper[j] - band.lower[j]);
      if (std::abs(pinball_risk(g, mix, beta).value - r0) >
          1e-10 * std::max(1.0, r0))
        ++linear.failures;
    }
  }
  report.properties = {cauchy, orders, lattice, extremal, linear, member};
  return report;
}

// Quantile-side equivalences: band/plug-in equality, bracketing of grid
// minimizers, optimality of the band edges, monotonicity in beta, and the
// empty open band.
inline SuiteReport run_quantile_suite(std::uint64_t seed, std::int64_t reps) {
  CounterRng rng(seed, 0xB6);
  SuiteReport report;
  report.suite = "quantile";
  PropertyResult equality{"plugin_equals_band_exactly", 0, 0};
  PropertyResult bracket{"band_brackets_grid_minimizers", 0, 0};
  PropertyResult optimal{"band_edges_attain_min_risk", 0, 0};
  PropertyResult monotone{"band_monotone_in_beta", 0, 0};
  PropertyResult open_band{"open_band_contains_no_data", 0, 0};

  const double betas[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  for (std::int64_t rep = 0; rep < reps; ++rep) {
    const DesignGroups g = detail::random_verify_groups(rng, 5, 12);
    const std::size_t m = g.num_groups();
    const CdfFamilyFit fit = fit_cdf_family(g);
    const double beta = betas[rng.next_u64() % 9];

    QuantileBand band;
    try {
      band = quantile_band(g, beta);  // asserts band invariants internally
      ++open_band.trials;
    } catch (const std::exception&) {
      ++open_band.trials;
      ++open_band.failures;
      continue;
    }

    {
      ++equality.trials;
      const QuantileBand plug = plugin_quantiles(fit, beta);
      if (plug.lower != band.lower || plug.upper != band.upper) ++equality.failures;
    }

    if (m <= 4 && g.total_count() <= 8) {
      ++bracket.trials;
      ++optimal.trials;
      std::vector<ExplicitLoss> losses(m);
      for (std::size_t j = 0; j < m; ++j)
        for (double y : g.responses(j)) losses[j].pinball.push_back({beta, y});
      const auto bf = brute_force_band(losses, g.distinct_responses());
      bool ok = true;
      for (std::size_t j = 0; j < m; ++j)
        ok = ok && band.lower[j] <= bf.lower[j] && band.upper[j] >= bf.upper[j];
      if (!ok) ++bracket.failures;
      const double tol = 1e-10 * std::max(1.0, std::abs(bf.min_value));
      if (std::abs(pinball_risk(g, band.lower, beta).value - bf.min_value) > tol ||
          std::abs(pinball_risk(g, band.upper, beta).value - bf.min_value) > tol)
        ++optimal.failures;
    }

    {
      ++monotone.trials;
      const double beta2 = std::min(0.95, beta + 0.05 + 0.3 * rng.uniform());
      const QuantileBand later = quantile_band(g, beta2);
      for (std::size_t j = 0; j < m; ++j)
        if (band.lower[j] > later.lower[j] || band.upper[j] > later.upper[j]) {
          ++monotone.failures;
          break;
        }
    }
  }
  report.properties = {equality, bracket, optimal, monotone, open_band};
  return report;
}

// DKW-type inequality for the heterogeneous uniform scales scenario.
inline SuiteReport run_dkw_suite(std::uint64_t seed, std::int64_t reps) {
  SuiteReport report;
  report.suite = "dkw";
  const std::size_t k = 100;
  std::vector<UnivariateDist> dists;
  for (std::size_t i = 1; i <= k; ++i)
    dists.push_back(uniform_dist(0.0, 1.0 + static_cast<double>(i) / k));
  const std::vector<double> etas{0.5, 1.0, 1.5, 2.0};
  const auto res = dkw_mc(dists, etas, reps, seed);
  for (std::size_t e = 0; e < etas.size(); ++e) {
    PropertyResult paper{"paper_bound_eta_" + format_eta(etas[e]), 1, 0};
    if (res.frequency[e] > dkw_paper_bound(etas[e])) paper.failures = 1;
    report.properties.push_back(paper);
    PropertyResult classical{"classical_bound_eta_" + format_eta(etas[e]), 1, 0};
    const double p = dkw_classical_bound(etas[e]);
    const double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(reps)) /
                                static_cast<double>(reps));
    if (res.frequency[e] > std::min(1.0, p) + 3.0 * se) classical.failures = 1;
    report.properties.push_back(classical);
  }
  return report;
}

// LLN exponential inequality for scaled Rademacher increments.
inline SuiteReport run_lln_suite(std::uint64_t seed, std::int64_t reps) {
  SuiteReport report;
  report.suite = "lln";
  const IncrementLaw law = rademacher_half_law();
  const std::int64_t n_max = 5000;
  for (std::int64_t n_o : {50, 200}) {
    const std::vector<double> etas{0.3, 0.5, 0.6};
    const auto res = lln_exp_mc(n_o, etas, reps, seed, law, n_max);
    for (std::size_t e = 0; e < etas.size(); ++e) {
      PropertyResult p{"bound_n" + std::to_string(n_o) + "_eta_" + format_eta(etas[e]),
                       1, 0};
      if (etas[e] > law.bound) {
        // above the almost-sure increment bound the frequency must vanish
        if (res.frequency[e] != 0.0) p.failures = 1;
      } else if (res.frequency[e] > lln_tail_bound(2.0, 1.5, 2.0, n_o, etas[e])) {
        p.failures = 1;
      }
      report.properties.push_back(p);
    }
  }
  return report;
}

inline SuiteReport run_verify_suite(const std::string& name, std::uint64_t seed,
                                    std::int64_t reps) {
  if (name == "isoreg") return run_isoreg_suite(seed, reps);
  if (name == "quantile") return run_quantile_suite(seed, reps);
  if (name == "dkw") return run_dkw_suite(seed, reps);
  if (name == "lln") return run_lln_suite(seed, reps);
  throw std::invalid_argument("unknown verify suite: " + name);
}

}  // namespace isocdf
