#include "spindle/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "spindle/errors.hpp"

namespace spindle::stats {

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("normal_quantile requires 0 < p < 1");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double z_for_level(double ci_level) {
  if (!(ci_level > 0.0 && ci_level < 1.0)) {
    throw ParameterError("confidence level must lie in (0, 1)");
  }
  return normal_quantile(0.5 + 0.5 * ci_level);
}

double erfcx(double x) noexcept {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  // Asymptotic expansion; the truncation error at x = 25 is below 1e-13.
  const double inv2 = 1.0 / (x * x);
  const double series =
      1.0 + inv2 * (-0.5 + inv2 * (0.75 + inv2 * (-1.875 + inv2 * (6.5625 + inv2 * -29.53125))));
  return series / (x * std::sqrt(std::numbers::pi));
}

void RunningMoments::push(double x) noexcept {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double RunningMoments::variance() const noexcept {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningMoments::std_error() const noexcept {
  return n_ == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

Interval wilson_interval(std::size_t successes, std::size_t n, double ci_level) {
  if (n == 0) throw ParameterError("wilson_interval requires n > 0");
  const double z = z_for_level(ci_level);
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  // The bounds are exactly 0 and 1 at the extremes; rounding would miss them.
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half),
          successes == n ? 1.0 : std::min(1.0, centre + half)};
}

bool overlaps(Interval a, Interval b) noexcept {
  return a.lower <= b.upper && b.lower <= a.upper;
}

double kolmogorov_sf(double lambda) noexcept {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.0) {
    // Small-lambda form of the Kolmogorov CDF.
    double cdf = 0.0;
    for (int k = 1; k < 50; ++k) {
      const double m = 2.0 * k - 1.0;
      const double term = std::exp(-m * m * std::numbers::pi * std::numbers::pi /
                                   (8.0 * lambda * lambda));
      cdf += term;
      if (term < 1e-17 * cdf) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  double sign = 1.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sf += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sf, 0.0, 1.0);
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ParameterError("KS test requires samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf) {
  const std::size_t n = samples.size();
  const double d = ks_distance(std::move(samples), cdf);
  const double sn = std::sqrt(static_cast<double>(n));
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d), n};
}

namespace {

// Returns (sup(F_a - F_b), sup(F_b - F_a)).
std::pair<double, double> two_sample_sups(std::vector<double>& a, std::vector<double>& b) {
  if (a.empty() || b.empty()) throw ParameterError("KS test requires two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double up = 0.0, down = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    const double diff = static_cast<double>(i) / na - static_cast<double>(j) / nb;
    up = std::max(up, diff);
    down = std::max(down, -diff);
  }
  return {up, down};
}

double effective_n(std::size_t na, std::size_t nb) {
  return static_cast<double>(na) * static_cast<double>(nb) / static_cast<double>(na + nb);
}

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  const double ne = effective_n(a.size(), b.size());
  const auto [up, down] = two_sample_sups(a, b);
  const double d = std::max(up, down);
  const double sn = std::sqrt(ne);
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d), static_cast<std::size_t>(ne)};
}

KsResult ks_two_sample_greater(std::vector<double> a, std::vector<double> b) {
  const double ne = effective_n(a.size(), b.size());
  const auto [up, down] = two_sample_sups(a, b);
  (void)down;
  return {up, std::min(1.0, std::exp(-2.0 * ne * up * up)), static_cast<std::size_t>(ne)};
}

double integrate(const std::function<double(double)>& f, double a, double b, double tolerance) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 20, tolerance);
}

double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace spindle::stats
