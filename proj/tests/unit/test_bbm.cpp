#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "spindle/bbm.hpp"
#include "spindle/errors.hpp"
#include "spindle/stats.hpp"

using namespace spindle;

namespace {

double mean_alive(const std::vector<ReplicateSummary>& reps) {
  stats::RunningMoments m;
  for (const auto& r : reps) m.push(static_cast<double>(r.alive));
  return m.mean();
}

}  // namespace

TEST(SimulateTree, ZeroHorizon) {
  RngStream rng(1, 0);
  const auto out = simulate_tree(make_params(0.5), make_initial(1.3), make_horizon(0.0), {}, rng);
  EXPECT_EQ(out.snapshot.alive(), 1u);
  EXPECT_EQ(out.snapshot.positions()[0], 1.3);
  EXPECT_EQ(out.branch_events, 0u);
}

TEST(SimulateTree, Deterministic) {
  const auto p = make_params(0.4);
  RngStream a(7, 11), b(7, 11);
  const auto x = simulate_tree(p, make_initial(2.0), make_horizon(3.0), {}, a);
  const auto y = simulate_tree(p, make_initial(2.0), make_horizon(3.0), {}, b);
  ASSERT_EQ(x.snapshot.alive(), y.snapshot.alive());
  EXPECT_EQ(0, std::memcmp(x.snapshot.positions().data(), y.snapshot.positions().data(),
                           x.snapshot.alive() * sizeof(double)));
  EXPECT_EQ(x.branch_events, y.branch_events);
}

TEST(SimulateTree, PositionsPositive) {
  const auto p = make_params(0.3);
  StreamFamily fam{2};
  for (std::size_t i = 0; i < 500; ++i) {
    RngStream rng = fam.stream(i);
    const auto out = simulate_tree(p, make_initial(1.0), make_horizon(2.0), {}, rng);
    for (double y : out.snapshot.positions()) ASSERT_GT(y, 0.0);
    EXPECT_EQ(out.extinct, out.snapshot.empty());
  }
}

TEST(SimulateTree, NonBranchingSurvivalMatchesReflection) {
  const std::size_t n = 40000;
  for (double eps : {0.2, 0.5, 0.8}) {
    const auto p = make_params(eps, 0.0);
    for (double x : {0.5, 1.0, 2.0}) {
      for (double t : {0.5, 2.0}) {
        const auto reps = simulate_replicates(p, make_initial(x), make_horizon(t), {},
                                              StreamFamily{derive_seed(3, static_cast<std::uint64_t>(x * 100 + t * 10 + eps * 1000))}, n);
        const double freq = mean_alive(reps);
        const double exact = drifted_survival_probability(x, t, p.rho);
        const double se = std::sqrt(exact * (1 - exact) / n);
        EXPECT_NEAR(freq, exact, 4.0 * se + 1e-12) << eps << " " << x << " " << t;
      }
    }
  }
}

TEST(SimulateTree, MartingaleMean) {
  const std::size_t n = 20000;
  for (double eps : {0.3, 0.7}) {
    for (double x : {0.5, 1.5}) {
      const auto p = make_params(eps);
      const double t = 1.5;
      const auto reps = simulate_replicates(p, make_initial(x), make_horizon(t), {}, StreamFamily{4}, n);
      stats::RunningMoments m;
      for (const auto& r : reps) {
        m.push(r.alive == 0 ? 0.0 : std::exp(r.log_v_core + eps * t));
      }
      const double v0 = x * std::exp(p.rho * x);
      EXPECT_NEAR(m.mean() / v0, 1.0, 4.0 * m.std_error() / v0) << eps << " " << x;
    }
  }
}

TEST(ExpectedPopulation, SinglePathOracle) {
  // E[N_t] = e^{bt} P(one drifted path survives); estimate the survival
  // factor from the Gaussian endpoint and the bridge crossing probability.
  const double x = 1.2, t = 2.0;
  const auto p = make_params(0.5);
  RngStream rng(5, 0);
  stats::RunningMoments m;
  for (int i = 0; i < 400000; ++i) {
    const double end = x - p.rho * t + std::sqrt(t) * rng.normal();
    m.push(end > 0.0 ? 1.0 - std::exp(-2.0 * x * end / t) : 0.0);
  }
  const double got = expected_population(make_initial(x), make_horizon(t), p);
  EXPECT_NEAR(got, std::exp(t) * m.mean(), 4.0 * std::exp(t) * m.std_error());
}

TEST(ExpectedPopulation, MatchesSimulation) {
  const auto p = make_params(0.6);
  const auto reps = simulate_replicates(p, make_initial(1.0), make_horizon(2.0), {}, StreamFamily{6}, 40000);
  stats::RunningMoments m;
  for (const auto& r : reps) m.push(static_cast<double>(r.alive));
  EXPECT_NEAR(m.mean(), expected_population(make_initial(1.0), make_horizon(2.0), p),
              4.0 * m.std_error());
}

TEST(DriftedSurvival, Properties) {
  EXPECT_EQ(drifted_survival_probability(1.0, 0.0, 1.5), 1.0);
  double prev = 0.0;
  for (double x = 0.1; x < 6.0; x += 0.1) {
    const double s = drifted_survival_probability(x, 2.0, 1.5);
    EXPECT_GE(s, prev);
    prev = s;
  }
  // Far from 0 the large reflection factor must not overflow.
  EXPECT_TRUE(std::isfinite(drifted_survival_probability(300.0, 50.0, 1.8)));
  EXPECT_GE(drifted_survival_probability(0.5, 200.0, 1.8), 0.0);
  EXPECT_THROW(drifted_survival_probability(0.0, 1.0, 1.0), ParameterError);
}

TEST(SimulateTree, SurvivalMonotoneInStart) {
  const auto p = make_params(0.5);
  double prev = 0.0;
  for (double x : {0.25, 1.0, 3.0}) {
    const double s = 1.0 - [&] {
      const auto reps = simulate_replicates(p, make_initial(x), make_horizon(2.0), {}, StreamFamily{7}, 20000);
      std::size_t dead = 0;
      for (const auto& r : reps) dead += r.extinct();
      return static_cast<double>(dead) / reps.size();
    }();
    EXPECT_GT(s, prev);
    prev = s;
  }
}

TEST(SimulateTreeObserved, NestedSurvival) {
  const auto p = make_params(0.4);
  const std::vector<double> cps{0.5, 1.0, 2.0, 4.0};
  StreamFamily fam{8};
  for (std::size_t i = 0; i < 2000; ++i) {
    RngStream rng = fam.stream(i);
    const auto outs = simulate_tree_observed(p, make_initial(1.0), cps, {}, rng);
    ASSERT_EQ(outs.size(), cps.size());
    for (std::size_t k = 1; k < outs.size(); ++k) {
      if (outs[k - 1].extinct) ASSERT_TRUE(outs[k].extinct);
      ASSERT_GE(outs[k].branch_events, outs[k - 1].branch_events);
    }
  }
}

TEST(SimulateTreeObserved, LastCheckpointMatchesSingleHorizonLaw) {
  const auto p = make_params(0.5);
  const std::vector<double> cps{1.0, 2.0};
  StreamFamily fam{9};
  stats::RunningMoments m;
  for (std::size_t i = 0; i < 20000; ++i) {
    RngStream rng = fam.stream(i);
    m.push(static_cast<double>(simulate_tree_observed(p, make_initial(1.0), cps, {}, rng)[1].snapshot.alive()));
  }
  EXPECT_NEAR(m.mean(), expected_population(make_initial(1.0), make_horizon(2.0), p), 4.0 * m.std_error());
}

TEST(SimulateTreeObserved, RejectsBadCheckpoints) {
  RngStream rng(1, 0);
  const std::vector<double> unsorted{2.0, 1.0}, empty;
  EXPECT_THROW(simulate_tree_observed(make_params(0.5), make_initial(1.0), unsorted, {}, rng), ParameterError);
  EXPECT_THROW(simulate_tree_observed(make_params(0.5), make_initial(1.0), empty, {}, rng), ParameterError);
}

TEST(ConditionalPopulationNaive, NumeratorMatchesClosedForm) {
  const auto p = make_params(0.5);
  const auto r = conditional_population_naive(p, make_initial(1.0), make_horizon(4.0), 100000, {}, StreamFamily{10});
  const double exact = expected_population(make_initial(1.0), make_horizon(4.0), p);
  EXPECT_NEAR(r.numerator.estimate, exact, 4.0 * r.numerator.std_error);
  EXPECT_GT(r.ratio.estimate, 1.0);
  EXPECT_NEAR(r.ratio.estimate, r.numerator.estimate / r.denominator.estimate, 1e-12);
}

TEST(ConditionalPopulationNaive, Errors) {
  const auto p = make_params(0.9);
  EXPECT_THROW(conditional_population_naive(p, make_initial(1.0), make_horizon(1.0), 999, {}, StreamFamily{1}),
               ParameterError);
  EXPECT_THROW(conditional_population_naive(p, make_initial(0.01), make_horizon(30.0), 1000, {}, StreamFamily{1}),
               DegenerateEstimateError);
}

TEST(SimulateTree, Limits) {
  const auto p = make_params(0.5, 5.0);
  RngStream rng(11, 0);
  EXPECT_THROW(simulate_tree(p, make_initial(20.0), make_horizon(5.0), {10, 100'000'000}, rng), ExplosionError);
  RngStream rng2(11, 0);
  try {
    simulate_tree(p, make_initial(20.0), make_horizon(5.0), {1'000'000, 50}, rng2);
    FAIL() << "expected BudgetError";
  } catch (const BudgetError& e) {
    EXPECT_GT(e.time_reached(), 0.0);
    EXPECT_LE(e.time_reached(), 5.0);
  }
  EXPECT_THROW(validate_limits({0, 1}), ParameterError);
}

TEST(SimulateReplicates, IndependentOfWorkers) {
  const auto p = make_params(0.4);
  const auto a = simulate_replicates(p, make_initial(1.0), make_horizon(2.0), {}, StreamFamily{12}, 3000, 1);
  const auto b = simulate_replicates(p, make_initial(1.0), make_horizon(2.0), {}, StreamFamily{12}, 3000, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].alive, b[i].alive);
    EXPECT_EQ(std::memcmp(&a[i].log_v_core, &b[i].log_v_core, sizeof(double)), 0);
  }
}
