#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spindle/errors.hpp"
#include "spindle/rng.hpp"
#include "spindle/special_functions.hpp"
#include "spindle/stats.hpp"

using namespace spindle;

TEST(BridgeSup, SeriesValues) {
  const double v1 = reflected_bridge_sup_cdf(make_barrier(0.0, 0.7071068));
  EXPECT_NEAR(v1, oracle::bridge_sup_series(0.7071068 * 0.7071068), 1e-12);
  EXPECT_NEAR(v1, 0.300626, 1e-6);
  const double v2 = reflected_bridge_sup_cdf(make_barrier(1.0, 0.5));
  EXPECT_NEAR(v2, oracle::bridge_sup_series(0.75), 1e-12);
  EXPECT_NEAR(v2, 0.558694, 1e-6);
}

TEST(BridgeSup, SmallQAgainstHighPrecisionSeries) {
  const double b = 0.2236068;
  const double q = b * b;
  const double v = reflected_bridge_sup_cdf(make_barrier(0.0, b));
  const double ref = oracle::bridge_sup_series(q);
  EXPECT_NEAR(v / ref, 1.0, 1e-10);
  EXPECT_NEAR(v, 2.157e-10, 0.001e-10);
}

TEST(BridgeSup, DirectSeriesCancelsAtSmallQ) {
  // Near q = 0.05 the alternating sum loses about nine digits to rounding;
  // the transformed series keeps full precision.
  const double truth = oracle::bridge_sup_series(0.05);
  const double partial = reflected_bridge_sup_partial_sum(0.05, 40);
  EXPECT_GT(std::abs(partial - truth) / truth, 1e-9);
  EXPECT_LT(std::abs(reflected_bridge_sup_cdf_transformed(0.05) - truth) / truth, 1e-12);
}

TEST(BridgeSup, AsymptoticForm) {
  EXPECT_NEAR(reflected_bridge_sup_asymptotic(0.05) / reflected_bridge_sup_cdf_transformed(0.05), 1.0, 1e-6);
  EXPECT_NEAR(reflected_bridge_sup_asymptotic(0.5), std::sqrt(4 * std::numbers::pi) * std::exp(-std::numbers::pi * std::numbers::pi / 4), 1e-12);
  EXPECT_NEAR(reflected_bridge_sup_asymptotic(0.5), 0.300626, 1e-6);
  EXPECT_LT(reflected_bridge_sup_asymptotic(1e6), 1e-2);
  EXPECT_NEAR(reflected_bridge_sup_cdf(make_barrier(0.0, 1e3)), 1.0, 1e-15);
}

TEST(BridgeSup, MonotoneAndInRange) {
  for (int i = 0; i < 12; ++i) {
    double prev = 0.0;
    for (int j = 1; j <= 12; ++j) {
      const double v = reflected_bridge_sup_cdf(make_barrier(0.2 * i, 0.1 * j));
      EXPECT_GE(v, prev);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      prev = v;
    }
  }
  for (int j = 1; j <= 12; ++j) {
    double prev = 0.0;
    for (int i = 0; i < 12; ++i) {
      const double v = reflected_bridge_sup_cdf(make_barrier(0.2 * i, 0.1 * j));
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(BridgeSup, PartialSumsBracketLimit) {
  for (double q : {0.3, 0.4, 0.75, 1.5}) {
    const double limit = oracle::bridge_sup_series(q);
    for (int n = 1; n <= 6; ++n) {
      const double s = reflected_bridge_sup_partial_sum(q, n);
      if (n % 2 == 1) {
        EXPECT_LE(s, limit + 1e-15) << q << " " << n;
      } else {
        EXPECT_GE(s, limit - 1e-15) << q << " " << n;
      }
    }
  }
}

TEST(BridgeSup, BranchesAgreeAroundSwitch) {
  for (double q = 0.25; q <= 0.35 + 1e-12; q += 0.0025) {
    const double d = reflected_bridge_sup_cdf_direct(q);
    const double t = reflected_bridge_sup_cdf_transformed(q);
    EXPECT_LE(std::abs(d - t) / d, 1e-10) << q;
  }
}

TEST(BridgeSup, DirectSeriesCapThrows) {
  EXPECT_THROW(reflected_bridge_sup_cdf_direct(1e-6), ParameterError);
}

TEST(BridgeSup, BarrierValidation) {
  EXPECT_THROW(make_barrier(-0.1, 1.0), ParameterError);
  EXPECT_THROW(make_barrier(0.0, 0.0), ParameterError);
}

TEST(Theta, IdentityResidual) {
  for (double q : {0.05, 0.1, 0.3, 0.5, 1.0, 2.0, 10.0}) {
    EXPECT_LT(jacobi_theta_identity_residual(q), 1e-10) << q;
  }
  for (double q : {0.5, 2.0, 50.0}) EXPECT_LT(jacobi_theta_identity_residual(q), 1e-12) << q;
}

TEST(Theta, LargeQTheta4IsOne) {
  EXPECT_NEAR(theta4_imaginary(2.0 * 50.0 / std::numbers::pi), 1.0, 1e-15);
}

TEST(Theta, DroppedTermIsDetected) {
  EXPECT_GT(jacobi_theta_identity_residual(0.05, 2), 1e-3);
  EXPECT_GT(jacobi_theta_identity_residual(0.5, 2), 1e-3);
}

TEST(Theta, SeriesAgainstDirectSums) {
  // theta_4(0 | i y) = sum (-1)^k e^{-pi y k^2}, theta_2(0 | i y) = sum e^{-pi y (k + 1/2)^2}.
  const double y = 0.8;
  double t4 = 0.0, t2 = 0.0;
  for (int k = -30; k <= 30; ++k) {
    t4 += (k % 2 == 0 ? 1.0 : -1.0) * std::exp(-std::numbers::pi * y * k * k);
    t2 += std::exp(-std::numbers::pi * y * (k + 0.5) * (k + 0.5));
  }
  EXPECT_NEAR(theta4_imaginary(y), t4, 1e-14);
  EXPECT_NEAR(theta2_imaginary(y), t2, 1e-14);
}

TEST(Poisson, Examples) {
  EXPECT_NEAR(poisson_concentration_bound({100.0, 50.0}), 2.0 * std::exp(-25.0 / 3.0), 1e-15);
  EXPECT_NEAR(poisson_concentration_bound({100.0, 50.0}), 4.81e-4, 0.01e-4);
  EXPECT_NEAR(poisson_concentration_bound({0.0, 1.0}), 1.2131, 1e-4);
  EXPECT_NEAR(poisson_concentration_bound({5.0, 1e-12}), 2.0, 1e-9);
  EXPECT_THROW(poisson_concentration_bound({1.0, 0.0}), ParameterError);
}

TEST(Poisson, BoundDominatesExactTailExhaustively) {
  for (int lambda = 1; lambda <= 200; ++lambda) {
    for (int v = 1; v <= std::min(lambda, 100); ++v) {
      const double exact = oracle::poisson_two_sided_tail(lambda, v);
      const double bound = poisson_concentration_bound({double(lambda), double(v)});
      ASSERT_LE(exact, bound * (1 + 1e-12)) << "lambda=" << lambda << " v=" << v;
    }
  }
}

TEST(Gaussian, Examples) {
  const auto g2 = gaussian_upper_tail_with_bound(2.0);
  EXPECT_NEAR(g2.exact, 0.0227501, 1e-7);
  EXPECT_NEAR(g2.mills_bound, 0.0269955, 1e-7);
  const auto g10 = gaussian_upper_tail_with_bound(10.0);
  EXPECT_NEAR(g10.exact / 7.62e-24, 1.0, 1e-3);
  EXPECT_NEAR(g10.mills_bound / 7.69e-24, 1.0, 1e-3);
  EXPECT_LE(g10.exact, g10.mills_bound);
  EXPECT_DOUBLE_EQ(gaussian_upper_tail(0.0), 0.5);
}

TEST(Gaussian, MillsBoundOnLogGrid) {
  for (int i = 0; i <= 400; ++i) {
    const double x = 0.01 * std::pow(3000.0, i / 400.0);
    const auto g = gaussian_upper_tail_with_bound(x);
    EXPECT_LE(g.exact, g.mills_bound) << x;
    EXPECT_NEAR(g.exact, 0.5 * std::erfc(x / std::numbers::sqrt2), 1e-13 * g.exact) << x;
  }
}

// Monte Carlo reference: bridge sampled on a coarse grid, with the exact
// probability that each Brownian-bridge segment between grid points stays
// below beta. Unbiased for any grid.
static std::pair<double, double> prefix_max_reference(const PrefixMaxSpec& p, int steps, int reps,
                                                      std::uint64_t seed) {
  stats::RunningMoments m;
  const double dt = p.s / steps;
  for (int i = 0; i < reps; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    double w = 0.0, r = 0.0, stay = 1.0;
    for (int k = 0; k < steps && stay > 0.0; ++k) {
      // Bridge 0 -> eta over [0, u]: condition on current value at time r.
      const double next = w + (p.eta - w) * dt / (p.u - r) +
                          std::sqrt(dt * (p.u - r - dt) / (p.u - r)) * rng.normal();
      stay = next >= p.beta ? 0.0 : stay * -std::expm1(-2.0 * (p.beta - w) * (p.beta - next) / dt);
      w = next;
      r += dt;
    }
    m.push(1.0 - stay);
  }
  return {m.mean(), m.std_error()};
}

TEST(PrefixMax, AgreesWithMonteCarlo) {
  const PrefixMaxSpec spec{1.0, 0.5, 1.0, 0.3};
  const auto [mean, se] = prefix_max_reference(spec, 32, 400000, 77);
  EXPECT_NEAR(prefix_max_probability(spec), mean, 3.0 * se);
}

TEST(PrefixMax, FullBridgeLimit) {
  for (double eta : {-0.5, 0.0, 0.5, 0.9}) {
    const double v = prefix_max_probability({1.0, eta, 1.0, 1.0 - 1e-10});
    EXPECT_NEAR(v, std::exp(-2.0 * (1.0 - eta)), 1e-4) << eta;
  }
}

TEST(PrefixMax, SmallLevelGivesOne) {
  EXPECT_NEAR(prefix_max_probability({1e-9, 0.5, 1.0, 0.3}), 1.0, 1e-6);
}

TEST(PrefixMax, Monotone) {
  for (int i = 1; i <= 12; ++i) {
    double prev = 0.0;
    for (int j = 1; j <= 12; ++j) {
      const double v = prefix_max_probability({0.15 * i, 0.2, 1.5, 0.12 * j});
      EXPECT_GE(v, prev - 1e-15);
      prev = v;
    }
  }
  for (int j = 1; j <= 12; ++j) {
    double prev = 1.0;
    for (int i = 1; i <= 12; ++i) {
      const double v = prefix_max_probability({0.15 * i, 0.2, 1.5, 0.12 * j});
      EXPECT_LE(v, prev + 1e-15);
      prev = v;
    }
  }
}

TEST(PrefixMax, DomainErrors) {
  EXPECT_THROW(prefix_max_probability({1.0, 0.5, 1.0, 1.0}), ParameterError);
  EXPECT_THROW(prefix_max_probability({1.0, 0.5, 0.0, 0.5}), ParameterError);
  EXPECT_THROW(prefix_max_probability({0.0, 0.5, 1.0, 0.5}), ParameterError);
}

TEST(Roberts, ConstantAndCurve) {
  EXPECT_NEAR(kRobertsConstant, 4.13422, 1e-5);
  EXPECT_DOUBLE_EQ(roberts_curve(0.0), -1.0);
  EXPECT_NEAR(roberts_curve(1.0), -1.32288, 1e-5);
  EXPECT_THROW(roberts_curve(-1.0), ParameterError);
}

TEST(SurvivalBound, Examples) {
  const ModelParams p = make_params(0.5);
  EXPECT_NEAR(survival_upper_bound(1.0, 10.0, p), 0.0380845, 1e-7);
  EXPECT_NEAR(survival_upper_bound(1.0, 8.0, p), 0.10353, 1e-5);
  EXPECT_EQ(survival_upper_bound(1.0, 0.0, p), 1.0);
}
