#pragma once

// Grouping of (x, y) observations by distinct covariate value, plus the
// per-group and pooled empirical distribution functions built from them.
// Covariates are compared with exact floating-point equality; callers who
// want tolerance-based grouping must pre-round their x values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "isocdf/step_cdf.hpp"

namespace isocdf {

struct Observation {
  double x;
  double y;
};

class DesignGroups {
 public:
  // xs strictly increasing; responses[j] sorted, length = weights[j] >= 1.
  DesignGroups(std::vector<double> xs, std::vector<std::vector<double>> responses)
      : xs_(std::move(xs)), responses_(std::move(responses)) {
    if (xs_.empty() || xs_.size() != responses_.size())
      throw std::invalid_argument("DesignGroups: inconsistent group data");
    n_ = 0;
    weights_.reserve(xs_.size());
    for (std::size_t j = 0; j < xs_.size(); ++j) {
      if (j > 0 && !(xs_[j - 1] < xs_[j]))
        throw std::invalid_argument("DesignGroups: covariates not increasing");
      if (responses_[j].empty())
        throw std::invalid_argument("DesignGroups: empty group");
      if (!std::is_sorted(responses_[j].begin(), responses_[j].end()))
        throw std::invalid_argument("DesignGroups: group responses not sorted");
      weights_.push_back(static_cast<std::int64_t>(responses_[j].size()));
      n_ += weights_.back();
    }
  }

  std::size_t num_groups() const { return xs_.size(); }
  std::int64_t total_count() const { return n_; }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<std::int64_t>& weights() const { return weights_; }
  const std::vector<double>& responses(std::size_t j) const {
    check_index(j);
    return responses_[j];
  }

  std::int64_t pooled_weight(std::size_t r, std::size_t s) const {
    check_range(r, s);
    std::int64_t w = 0;
    for (std::size_t j = r; j <= s; ++j) w += weights_[j];
    return w;
  }

  // Empirical CDF of group j (0-based index).
  StepCdf empirical_cdf(std::size_t j) const {
    check_index(j);
    return StepCdf::from_sorted(responses_[j]);
  }

  // Weight-averaged CDF over groups r..s inclusive; equals the empirical CDF
  // of the concatenated responses.
  StepCdf pooled_cdf(std::size_t r, std::size_t s) const {
    check_range(r, s);
    std::vector<double> merged;
    merged.reserve(static_cast<std::size_t>(pooled_weight(r, s)));
    for (std::size_t j = r; j <= s; ++j)
      merged.insert(merged.end(), responses_[j].begin(), responses_[j].end());
    std::sort(merged.begin(), merged.end());
    return StepCdf::from_sorted(merged);
  }

  // Sorted distinct response values across all groups (the fit thresholds).
  std::vector<double> distinct_responses() const {
    std::vector<double> all;
    all.reserve(static_cast<std::size_t>(n_));
    for (const auto& g : responses_) all.insert(all.end(), g.begin(), g.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
  }

 private:
  void check_index(std::size_t j) const {
    if (j >= xs_.size()) throw std::out_of_range("DesignGroups: index out of range");
  }
  void check_range(std::size_t r, std::size_t s) const {
    if (r > s || s >= xs_.size())
      throw std::out_of_range("DesignGroups: invalid group range");
  }

  std::vector<double> xs_;
  std::vector<std::int64_t> weights_;
  std::vector<std::vector<double>> responses_;
  std::int64_t n_ = 0;
};

inline DesignGroups group_by_design(std::span<const Observation> observations) {
  if (observations.empty()) throw std::invalid_argument("no observations");
  std::vector<Observation> sorted(observations.begin(), observations.end());
  for (const auto& o : sorted)
    if (!std::isfinite(o.x) || !std::isfinite(o.y))
      throw std::invalid_argument("group_by_design: non-finite observation");
  std::sort(sorted.begin(), sorted.end(), [](const Observation& a, const Observation& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::vector<double> xs;
  std::vector<std::vector<double>> responses;
  for (const auto& o : sorted) {
    if (xs.empty() || o.x != xs.back()) {
      xs.push_back(o.x);
      responses.emplace_back();
    }
    responses.back().push_back(o.y);
  }
  return DesignGroups(std::move(xs), std::move(responses));
}

}  // namespace isocdf
