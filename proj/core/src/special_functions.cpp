#include "spindle/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "spindle/errors.hpp"
#include "spindle/stats.hpp"

namespace spindle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesTolerance = 1e-16;

void require_positive_q(double q) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw ParameterError("barrier product q = b(a+b) must be finite and > 0");
  }
}

[[noreturn]] void not_converged(const char* what) {
  throw ParameterError(std::string(what) + ": series did not converge within " +
                       std::to_string(kMaxSeriesTerms) + " terms");
}

// log Phi(x) without underflow for very negative x.
double log_normal_cdf(double x) {
  if (x > -5.0) return std::log(stats::normal_cdf(x));
  const double z = -x / std::numbers::sqrt2;
  return std::log(0.5 * stats::erfcx(z)) - z * z;
}

}  // namespace

LineBarrier make_barrier(double a, double b) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError("barrier slope a must be >= 0");
  if (!(b > 0.0) || !std::isfinite(b)) throw ParameterError("barrier intercept b must be > 0");
  return LineBarrier{a, b};
}

double reflected_bridge_sup_partial_sum(double q, int terms) {
  require_positive_q(q);
  double sum = 1.0;
  for (int k = 1; k <= terms; ++k) {
    const double term = 2.0 * std::exp(-2.0 * k * k * q);
    sum += (k % 2 == 1) ? -term : term;
  }
  return sum;
}

double reflected_bridge_sup_cdf_direct(double q) {
  require_positive_q(q);
  double sum = 1.0;
  for (int k = 1; k <= kMaxSeriesTerms; ++k) {
    const double term = 2.0 * std::exp(-2.0 * k * k * q);
    sum += (k % 2 == 1) ? -term : term;
    const double next = 2.0 * std::exp(-2.0 * (k + 1.0) * (k + 1.0) * q);
    if (next < kSeriesTolerance * std::abs(sum)) return sum;
  }
  not_converged("reflected_bridge_sup_cdf_direct");
}

double reflected_bridge_sup_cdf_transformed(double q) {
  require_positive_q(q);
  // 2 sqrt(pi / (2q)) e^{-pi^2 / (8q)} sum_{k>=0} e^{-pi^2 k (k+1) / (2q)}
  const double log_prefactor = std::log(2.0) + 0.5 * std::log(kPi / (2.0 * q)) - kPi * kPi / (8.0 * q);
  double sum = 1.0;
  bool converged = false;
  for (int k = 1; k <= kMaxSeriesTerms; ++k) {
    const double term = std::exp(-kPi * kPi * k * (k + 1.0) / (2.0 * q));
    sum += term;
    if (term < kSeriesTolerance * sum) {
      converged = true;
      break;
    }
  }
  if (!converged) not_converged("reflected_bridge_sup_cdf_transformed");
  return std::exp(log_prefactor + std::log(sum));
}

double reflected_bridge_sup_cdf(const LineBarrier& barrier) {
  const LineBarrier checked = make_barrier(barrier.a, barrier.b);
  const double q = checked.q();
  const double value = q >= kThetaBranchPoint ? reflected_bridge_sup_cdf_direct(q)
                                              : reflected_bridge_sup_cdf_transformed(q);
  return std::clamp(value, 0.0, 1.0);
}

double reflected_bridge_sup_asymptotic(double q) {
  require_positive_q(q);
  return std::exp(0.5 * std::log(2.0 * kPi / q) - kPi * kPi / (8.0 * q));
}

double reflected_bridge_sup_asymptotic(const LineBarrier& barrier) {
  return reflected_bridge_sup_asymptotic(make_barrier(barrier.a, barrier.b).q());
}

namespace {

template <typename Real>
Real theta4_series(const Real& tau_im, int drop_k, const Real& tolerance) {
  using std::abs;
  using std::exp;
  const Real pi = boost::math::constants::pi<Real>();
  Real sum = 1;
  for (int k = 1; k <= kMaxSeriesTerms; ++k) {
    const Real term = 2 * exp(-pi * tau_im * k * k);
    if (k != drop_k) sum += (k % 2 == 1) ? Real(-term) : term;
    if (term < tolerance * abs(sum)) return sum;
  }
  not_converged("theta4");
}

template <typename Real>
Real theta2_series(const Real& tau_im, const Real& tolerance) {
  using std::exp;
  const Real pi = boost::math::constants::pi<Real>();
  Real sum = 1;
  for (int k = 1; k <= kMaxSeriesTerms; ++k) {
    const Real term = exp(-pi * tau_im * k * (k + 1));
    sum += term;
    if (term < tolerance * sum) return 2 * exp(-pi * tau_im / 4) * sum;
  }
  not_converged("theta2");
}

}  // namespace

double theta4_imaginary(double tau_im, int drop_k) {
  if (!(tau_im > 0.0)) throw ParameterError("theta4 requires Im(tau) > 0");
  return theta4_series<double>(tau_im, drop_k, kSeriesTolerance);
}

double theta2_imaginary(double tau_im) {
  if (!(tau_im > 0.0)) throw ParameterError("theta2 requires Im(tau) > 0");
  return theta2_series<double>(tau_im, kSeriesTolerance);
}

double jacobi_theta_identity_residual(double q, int drop_k) {
  require_positive_q(q);
  using Real = boost::multiprecision::cpp_bin_float_50;
  const Real pi = boost::math::constants::pi<Real>();
  const Real qq = q;
  const Real tolerance = Real(1e-30);
  const Real lhs = theta4_series<Real>(2 * qq / pi, drop_k, tolerance);
  const Real rhs = sqrt(pi / (2 * qq)) * theta2_series<Real>(pi / (2 * qq), tolerance);
  return static_cast<double>(abs(lhs - rhs) / abs(rhs));
}

double poisson_concentration_bound(const PoissonBoundSpec& spec) {
  if (!(spec.lambda >= 0.0)) throw ParameterError("Poisson mean must be >= 0");
  if (!(spec.v > 0.0)) throw ParameterError("deviation v must be > 0");
  return 2.0 * std::exp(-spec.v * spec.v / (2.0 * (spec.lambda + spec.v)));
}

double gaussian_upper_tail(double x) { return stats::normal_sf(x); }

GaussianTail gaussian_upper_tail_with_bound(double x) {
  if (!(x > 0.0)) throw ParameterError("Mills bound requires x > 0");
  return {stats::normal_sf(x), std::exp(-0.5 * x * x) / (x * std::sqrt(2.0 * kPi))};
}

double prefix_max_probability(const PrefixMaxSpec& spec) {
  const auto [beta, eta, u, s] = spec;
  if (!(u > 0.0)) throw ParameterError("bridge duration u must be > 0");
  if (!(s > 0.0) || !(s < u)) throw ParameterError("prefix length s must satisfy 0 < s < u");
  if (!(beta > 0.0)) throw ParameterError("level beta must be > 0");
  const double sd = std::sqrt(u * s * (u - s));
  const double lower_arg = (2.0 * beta * s - eta * s - beta * u) / sd;
  const double upper_arg = (beta * u - eta * s) / sd;
  const double reflected = std::exp(-2.0 * beta * (beta - eta) / u + log_normal_cdf(lower_arg));
  const double value = reflected + stats::normal_sf(upper_arg);
  constexpr double kSlack = 1e-12;
  if (value < -kSlack || value > 1.0 + kSlack) {
    throw ParameterError("prefix_max_probability left [0, 1]; inputs outside the formula's domain");
  }
  return std::clamp(value, 0.0, 1.0);
}

const double kRobertsConstant =
    std::pow(3.0, 4.0 / 3.0) * std::pow(kPi, 2.0 / 3.0) * std::pow(2.0, -7.0 / 6.0);

double roberts_curve(double s) {
  if (!(s >= 0.0)) throw ParameterError("roberts_curve requires s >= 0");
  const double cube_root = std::cbrt(s);
  const double log_term = std::log(s + std::numbers::e);
  return std::numbers::sqrt2 * s - kRobertsConstant * cube_root +
         kRobertsConstant * cube_root / (log_term * log_term) - 1.0;
}

double survival_upper_bound(double x, double t, const ModelParams& params) {
  if (!(x > 0.0)) throw ParameterError("survival bound requires x > 0");
  if (!(t >= 0.0)) throw ParameterError("survival bound requires t >= 0");
  return std::min(1.0, std::exp(params.rho * x - params.epsilon * t));
}

}  // namespace spindle
