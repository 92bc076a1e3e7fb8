#pragma once

#include <cstddef>

#include "spindle/model.hpp"

namespace spindle {

/// Barrier a*t + b for the reflected standard Brownian bridge; q = b(a + b).
struct LineBarrier {
  double a = 0.0;
  double b = 1.0;

  double q() const noexcept { return b * (a + b); }
};

/// Throws ParameterError unless a >= 0 and b > 0.
LineBarrier make_barrier(double a, double b);

struct PoissonBoundSpec {
  double lambda = 0.0;
  double v = 1.0;
};

/// Brownian bridge 0 -> eta over [0, u], maximum over the prefix [0, s].
struct PrefixMaxSpec {
  double beta = 1.0;
  double eta = 0.0;
  double u = 1.0;
  double s = 0.5;
};

/// Below this q the alternating series is replaced by its theta-transformed form.
inline constexpr double kThetaBranchPoint = 0.3;

/// Hard cap on series terms; exceeding it throws.
inline constexpr int kMaxSeriesTerms = 200;

/// P(sup_{0<=t<=1} (|B_t| - a t) < b) for a standard Brownian bridge B.
///
/// For q >= 0.3 this sums 1 + 2 sum_k (-1)^k exp(-2 k^2 q) directly. Below
/// that the alternating sum cancels catastrophically, so the equivalent
/// sqrt(pi / (2q)) * theta_2(0 | pi i / (2q)) series is used instead.
double reflected_bridge_sup_cdf(const LineBarrier& barrier);

/// Same value from one specific representation (for branch-agreement checks).
double reflected_bridge_sup_cdf_direct(double q);
double reflected_bridge_sup_cdf_transformed(double q);

/// Partial sum 1 + 2 sum_{k=1}^{terms} (-1)^k exp(-2 k^2 q).
double reflected_bridge_sup_partial_sum(double q, int terms);

/// Small-q asymptotic sqrt(2 pi / q) exp(-pi^2 / (8q)).
double reflected_bridge_sup_asymptotic(const LineBarrier& barrier);
double reflected_bridge_sup_asymptotic(double q);

/// theta_4(0 | tau) for tau = i * tau_im, by its defining series, with
/// optional removal of the +-`drop_k` terms (fault injection in the verifier).
double theta4_imaginary(double tau_im, int drop_k = 0);
/// theta_2(0 | tau) for tau = i * tau_im.
double theta2_imaginary(double tau_im);

/// Relative gap between theta_4(0 | 2qi/pi) and sqrt(pi/(2q)) theta_2(0 | pi i/(2q)).
/// Both sides are summed in 50-digit arithmetic, so the result reflects the
/// identity rather than double-precision cancellation.
double jacobi_theta_identity_residual(double q, int drop_k = 0);

/// 2 exp(-v^2 / (2 (lambda + v))), a bound on P(|Z - lambda| >= v), Z ~ Poisson(lambda).
double poisson_concentration_bound(const PoissonBoundSpec& spec);

struct GaussianTail {
  double exact = 0.0;
  double mills_bound = 0.0;
};

/// Upper standard normal tail at x.
double gaussian_upper_tail(double x);
/// Exact tail plus the Mills-ratio bound exp(-x^2/2) / (x sqrt(2 pi)); x > 0.
GaussianTail gaussian_upper_tail_with_bound(double x);

/// P(max_{0<=r<=s} B_r >= beta) for a Brownian bridge 0 -> eta over [0, u]
/// (Beghin-Orsingher). Excursions beyond [0, 1] of more than 1e-12 throw.
double prefix_max_probability(const PrefixMaxSpec& spec);

/// 3^{4/3} pi^{2/3} 2^{-7/6}.
extern const double kRobertsConstant;

/// sqrt(2) s - A s^{1/3} + A s^{1/3} / log^2(s + e) - 1, natural log.
double roberts_curve(double s);

/// min(1, exp(rho x - epsilon t)).
double survival_upper_bound(double x, double t, const ModelParams& params);

}  // namespace spindle
