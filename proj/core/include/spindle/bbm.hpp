#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spindle/model.hpp"
#include "spindle/report.hpp"
#include "spindle/rng.hpp"

namespace spindle {

struct SimLimits {
  std::size_t max_particles = 1'000'000;
  std::size_t max_events = 100'000'000;
};

/// Throws ParameterError unless both limits are positive.
void validate_limits(const SimLimits& limits);

struct TreeOutcome {
  PopulationSnapshot snapshot;
  bool extinct = false;
  std::size_t branch_events = 0;
  std::size_t max_population = 1;
};

/// Exact simulation of branching Brownian motion with drift -rho and
/// absorption at 0, from one particle at init.x, up to horizon.t.
///
/// Each particle's motion is advanced a whole segment at a time, a segment
/// ending at its exponential fission time or the horizon. The segment
/// endpoint is Gaussian; given both ends the path is a driftless Brownian
/// bridge, so it touched 0 with probability exp(-2 a b / dt) (or surely if
/// the endpoint is <= 0). There is no time step and no discretisation bias.
///
/// Throws ExplosionError / BudgetError when `limits` are exceeded.
TreeOutcome simulate_tree(const ModelParams& params, const InitialCondition& init,
                          const Horizon& horizon, const SimLimits& limits, RngStream& rng);

/// As simulate_tree, but observes one realisation at every time in
/// `checkpoints` (sorted ascending, >= 0). Outcome k describes the
/// population at checkpoints[k]; counters are cumulative up to that time.
/// Survival events are therefore nested across checkpoints.
std::vector<TreeOutcome> simulate_tree_observed(const ModelParams& params,
                                                const InitialCondition& init,
                                                std::span<const double> checkpoints,
                                                const SimLimits& limits, RngStream& rng);

/// Per-replicate summary kept by the replicate runner.
struct ReplicateSummary {
  std::uint64_t stream_id = 0;
  std::size_t alive = 0;
  double log_v_core = 0.0;  // -infinity when extinct
  std::size_t branch_events = 0;
  std::size_t max_population = 1;

  bool extinct() const noexcept { return alive == 0; }
};

ReplicateSummary summarize(const TreeOutcome& outcome, const ModelParams& params,
                           std::uint64_t stream_id);

/// Runs `reps` independent trees, replicate i on family.stream(i).
std::vector<ReplicateSummary> simulate_replicates(const ModelParams& params,
                                                  const InitialCondition& init,
                                                  const Horizon& horizon, const SimLimits& limits,
                                                  const StreamFamily& family, std::size_t reps,
                                                  unsigned workers = 1);

/// P(Brownian motion with drift -rho from x stays > 0 on [0, t]), by the
/// reflection principle.
double drifted_survival_probability(double x, double t, double rho);

/// E[N_t] = exp(branch_rate * t) * drifted_survival_probability(x, t, rho).
double expected_population(const InitialCondition& init, const Horizon& horizon,
                           const ModelParams& params);

struct ConditionalPopulationReport {
  EstimateReport ratio;         // E[N_t | N_t > 0]
  EstimateReport numerator;     // E[N_t]
  EstimateReport denominator;   // P(N_t > 0)
};

/// Ratio estimator mean(N_t) / frequency(N_t > 0) with a delta-method
/// standard error. Requires reps >= 1000; throws DegenerateEstimateError
/// when no replicate survives.
ConditionalPopulationReport conditional_population_naive(
    const ModelParams& params, const InitialCondition& init, const Horizon& horizon,
    std::size_t reps, const SimLimits& limits, const StreamFamily& family, unsigned workers = 1,
    double ci_level = 0.95);

/// Same estimator over precomputed replicate summaries.
ConditionalPopulationReport conditional_population_from(std::span<const ReplicateSummary> reps,
                                                        double ci_level, Manifest manifest);

}  // namespace spindle
