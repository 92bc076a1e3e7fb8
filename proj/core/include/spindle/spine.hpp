#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spindle/bbm.hpp"
#include "spindle/diffusion.hpp"
#include "spindle/report.hpp"

namespace spindle {

/// The spine under the size-biased measure: positions at the branch times and
/// at the horizon. spine_path.grid = {0, branch_times..., horizon}.
struct SpineRealization {
  SamplePath spine_path;
  std::vector<double> branch_times;
  std::vector<double> branch_positions;
};

struct QTreeOutcome {
  SpineRealization spine;
  PopulationSnapshot merged_snapshot;  // spine particle plus surviving subtree particles
  std::size_t subtree_count = 0;
};

/// One draw of the branching process under the measure with density
/// V(t)/V(0): a Bessel-3 spine (or a Bessel bridge to `endpoint` when given)
/// shedding subtrees at rate 2 * branch_rate; every subtree is an ordinary
/// absorbed BBM run by simulate_tree from the spine position at its birth.
QTreeOutcome sample_q_tree(const ModelParams& params, const InitialCondition& init,
                           const Horizon& horizon, const SimLimits& limits, RngStream& rng,
                           std::optional<double> endpoint = std::nullopt);

struct QReplicateSummary {
  std::uint64_t stream_id = 0;
  std::size_t branch_count = 0;
  double spine_terminal = 0.0;
  double log_v_core = 0.0;
  std::size_t alive = 0;
};

std::vector<QReplicateSummary> simulate_q_replicates(const ModelParams& params,
                                                     const InitialCondition& init,
                                                     const Horizon& horizon,
                                                     const SimLimits& limits,
                                                     const StreamFamily& family, std::size_t reps,
                                                     unsigned workers = 1,
                                                     std::optional<double> endpoint = std::nullopt);

/// sqrt(2 pi t^3) * mean(exp(-log_v_core)) over Q-replicates. Requires reps >= 1000.
EstimateReport keps_estimate(const ModelParams& params, const InitialCondition& init,
                             const Horizon& horizon, std::size_t reps, const SimLimits& limits,
                             const StreamFamily& family, unsigned workers = 1,
                             double ci_level = 0.95);

/// Same estimate from precomputed Q-replicates.
EstimateReport keps_from(std::span<const QReplicateSummary> reps, double horizon, double ci_level,
                         Manifest manifest);

/// Survival probability implied by a K estimate:
/// K * x / sqrt(2 pi t^3) * exp(rho x - epsilon t). The identity
/// P(N_t > 0) = x e^{rho x - epsilon t} Q[1 / sum Y e^{rho Y}] holds at every t.
EstimateReport implied_survival(const EstimateReport& keps, const ModelParams& params,
                                const InitialCondition& init, const Horizon& horizon);

/// Limit conditional population 2 / (rho^2 K), with a delta-method error.
EstimateReport implied_conditional_population(const EstimateReport& keps,
                                              const ModelParams& params);

/// Names accepted by radon_nikodym_check: "one", "min_n_10", "survive".
std::vector<std::string> registered_functionals();

/// Evaluates a registered population functional F(N_t). Throws RegistryError.
double evaluate_functional(const std::string& functional_id, std::size_t population);

/// (E_P[F V(t)] / V(0), E_Q[F]) by independent simulation under each measure.
std::pair<EstimateReport, EstimateReport> radon_nikodym_check(
    const std::string& functional_id, const ModelParams& params, const InitialCondition& init,
    const Horizon& horizon, std::size_t reps, const StreamFamily& family, unsigned workers = 1,
    const SimLimits& limits = {}, double ci_level = 0.99);

/// log of 2 b int_{t-w}^{t} xi_r e^{rho xi_r - epsilon (t - r)} dr + xi_t e^{rho xi_t},
/// where b is the branching rate and t the last grid time: the conditional
/// expectation of sum Y e^{rho Y} at t given the spine. Trapezoid rule on the
/// spine's own grid (at least 8 points). `window` defaults to the whole path.
double log_spine_additive_functional(const SamplePath& spine, const ModelParams& params,
                                     std::optional<double> window = std::nullopt);
double spine_additive_functional(const SamplePath& spine, const ModelParams& params,
                                 std::optional<double> window = std::nullopt);
double spine_additive_functional(const SpineRealization& spine, const ModelParams& params);

/// Redraws the subtrees along a frozen spine (linear interpolation between
/// grid points) and returns the merged population at the path's last time.
PopulationSnapshot resample_subtrees(const SamplePath& spine, const ModelParams& params,
                                     const SimLimits& limits, RngStream& rng);

}  // namespace spindle
