#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spindle/bbm.hpp"
#include "spindle/report.hpp"

namespace spindle {

/// Sample mean with standard error s / sqrt(n). Needs at least two samples.
EstimateReport mc_mean_ci(std::span<const double> samples, double ci_level = 0.95,
                          Manifest manifest = {});

/// Bernoulli frequency successes / n with the Wald standard error; below 10
/// successes the Wilson interval is appended to the manifest notes.
EstimateReport bernoulli_report(std::size_t successes, std::size_t n, double ci_level,
                                Manifest manifest = {});

/// Frequency of N_t > 0 over independent trees. Requires reps >= 1000.
/// When fewer than 10 replicates survive the Wald interval is useless, so the
/// Wilson interval is appended to the manifest notes.
EstimateReport survival_probability_naive(const ModelParams& params, const InitialCondition& init,
                                          const Horizon& horizon, std::size_t reps,
                                          const SimLimits& limits, const StreamFamily& family,
                                          unsigned workers = 1, double ci_level = 0.95);

/// Survival frequencies at several horizons from the same trees: replicate i
/// is one realisation observed at every horizon, so the estimates are
/// nonincreasing in t.
std::vector<EstimateReport> survival_curve_naive(const ModelParams& params,
                                                 const InitialCondition& init,
                                                 std::span<const double> horizons,
                                                 std::size_t reps, const SimLimits& limits,
                                                 const StreamFamily& family, unsigned workers = 1,
                                                 double ci_level = 0.95);

}  // namespace spindle
