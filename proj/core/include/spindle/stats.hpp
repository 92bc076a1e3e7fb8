#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace spindle::stats {

double normal_cdf(double x) noexcept;
/// Upper tail 1 - Phi(x), accurate far into the tail.
double normal_sf(double x) noexcept;
double normal_quantile(double p);
/// Two-sided standard normal quantile for a confidence level, e.g. 0.95 -> 1.95996.
double z_for_level(double ci_level);

/// Scaled complementary error function exp(x^2) erfc(x), valid for all x.
double erfcx(double x) noexcept;

/// Running mean / variance (Welford).
class RunningMoments {
 public:
  void push(double x) noexcept;
  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance; 0 when fewer than two samples.
  double variance() const noexcept;
  double std_error() const noexcept;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Wilson score interval for `successes` out of `n` Bernoulli trials.
Interval wilson_interval(std::size_t successes, std::size_t n, double ci_level);

bool overlaps(Interval a, Interval b) noexcept;

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda) noexcept;

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// One-sample two-sided KS test of `samples` against `cdf`.
KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Two-sample two-sided KS test.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sided two-sample KS: statistic sup_x (F_a(x) - F_b(x)), large when `a`
/// tends to be smaller than `b`. p-value from exp(-2 n_eff D^2).
KsResult ks_two_sample_greater(std::vector<double> a, std::vector<double> b);

/// sup_x |F_n(x) - F(x)| without a p-value.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Adaptive Gauss-Kronrod quadrature on [a, b]; b may be +infinity.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tolerance = 1e-12);

/// Chi-square survival function P(X > x) for `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

}  // namespace spindle::stats
