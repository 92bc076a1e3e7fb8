#pragma once

// Reference computations for the tests. Each one takes a different route
// from the library code it checks: plain Simpson quadrature instead of
// Gauss-Kronrod, 50-digit direct series instead of transformed ones,
// pmf summation instead of regularized gamma functions.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      std::size_t n = 20000) {
  if (n % 2 == 1) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) {
    s += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return s * h / 3.0;
}

/// 1 + 2 sum (-1)^k exp(-2 k^2 q), summed in 50-digit arithmetic until the
/// terms drop below 1e-45.
inline double bridge_sup_series(double q) {
  Big sum = 1;
  const Big qq = q;
  for (int k = 1; k < 100000; ++k) {
    const Big term = 2 * exp(-2 * Big(k) * k * qq);
    sum += (k % 2 == 1 ? -term : term);
    if (term < Big("1e-45")) break;
  }
  return static_cast<double>(sum);
}

/// P(|Z - lambda| >= v) for Z ~ Poisson(lambda), integer lambda and v,
/// by summing log-space pmf terms over the two tails.
inline double poisson_two_sided_tail(int lambda, int v) {
  auto pmf = [&](int k) {
    return std::exp(k * std::log(static_cast<double>(lambda)) - lambda - std::lgamma(k + 1.0));
  };
  double lower = 0.0;
  for (int k = 0; k <= lambda - v; ++k) lower += pmf(k);
  double upper = 0.0;
  for (int k = lambda + v; k < lambda + v + 2000; ++k) {
    const double p = pmf(k);
    upper += p;
    if (p < 1e-300) break;
  }
  return lower + upper;
}

/// Bessel-3 transition density (y/x) phi_t(y-x) - phi_t(y+x), written out
/// directly; x = 0 uses the limiting Maxwell form.
inline double bessel_density(double x, double y, double t) {
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi * t);
  if (x == 0.0) return 2.0 * c * y * y / t * std::exp(-y * y / (2.0 * t));
  return (y / x) * c * (std::exp(-(y - x) * (y - x) / (2.0 * t)) - std::exp(-(y + x) * (y + x) / (2.0 * t)));
}

/// Standard normal CDF from std::erfc.
inline double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Maxwell CDF with scale sigma: law of the norm of a centred 3-d Gaussian.
inline double maxwell_cdf(double y, double sigma) {
  const double u = y / sigma;
  return std::erf(u / std::numbers::sqrt2) - std::sqrt(2.0 / std::numbers::pi) * u * std::exp(-u * u / 2.0);
}

}  // namespace oracle
