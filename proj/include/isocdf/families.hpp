#pragma once

// Built-in conditional response families for the simulation harness.  Each
// family fixes F_x for every covariate x together with the smoothness and
// growth constants that the rate schedules need:
//   * gaussian_shift:  Y | X = x  ~  N(x, 1),  F_x(y) = Phi(y - x).
//     Hoelder exponent alpha = 1 with C1 = sup phi = (2 pi)^{-1/2}; the
//     growth constant on (beta1, beta2) is the normal density at the more
//     extreme of the two quantiles.
//   * uniform_shift:   Y | X = x  ~  Uniform(x, x + 1),  alpha = 1, C1 = 1,
//     kappa = 1.
// Sampling is by inversion, so draws are a monotone function of one uniform.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "isocdf/random.hpp"

namespace isocdf {

struct ConditionalFamily {
  std::string name;
  double alpha = 1.0;  // Hoelder exponent of x -> F_x
  double c1 = 1.0;     // Hoelder constant

  std::function<double(double x, double y)> cdf;
  std::function<double(double x, double beta)> quantile;
  std::function<double(double beta1, double beta2)> growth_kappa;

  double sample(double x, CounterRng& rng) const {
    return quantile(x, rng.uniform_open());
  }
};

inline const ConditionalFamily& gaussian_shift_family() {
  static const ConditionalFamily fam{
      "gaussian_shift",
      1.0,
      0.3989422804014326779,  // (2 pi)^{-1/2}
      [](double x, double y) { return normal_cdf(y - x); },
      [](double x, double beta) { return x + normal_quantile(beta); },
      [](double beta1, double beta2) {
        return std::min(normal_density(normal_quantile(beta1)),
                        normal_density(normal_quantile(beta2)));
      }};
  return fam;
}

inline const ConditionalFamily& uniform_shift_family() {
  static const ConditionalFamily fam{
      "uniform_shift",
      1.0,
      1.0,
      [](double x, double y) { return std::clamp(y - x, 0.0, 1.0); },
      [](double x, double beta) { return x + beta; },
      [](double, double) { return 1.0; }};
  return fam;
}

inline const ConditionalFamily& family_by_name(const std::string& name) {
  if (name == "gaussian_shift") return gaussian_shift_family();
  if (name == "uniform_shift") return uniform_shift_family();
  throw std::invalid_argument("unknown family: " + name);
}

}  // namespace isocdf
