#include "spindle/bbm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

#include "spindle/errors.hpp"
#include "spindle/parallel.hpp"
#include "spindle/stats.hpp"

namespace spindle {

namespace {

// A particle waiting for its next event. `time` is when the current motion
// segment ends: its fission time or the next checkpoint, whichever is first.
struct Pending {
  double time;
  std::uint64_t id;
  double start_time;
  double position;
  double fission_time;
  bool fission;
};

struct Later {
  bool operator()(const Pending& a, const Pending& b) const noexcept {
    if (a.time != b.time) return a.time > b.time;
    return a.id > b.id;
  }
};

void validate_checkpoints(std::span<const double> checkpoints) {
  if (checkpoints.empty()) throw ParameterError("at least one observation time is required");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] >= 0.0) || !std::isfinite(checkpoints[i])) {
      throw ParameterError("observation times must be finite and >= 0");
    }
    if (i > 0 && !(checkpoints[i] > checkpoints[i - 1])) {
      throw ParameterError("observation times must be strictly increasing");
    }
  }
}

}  // namespace

void validate_limits(const SimLimits& limits) {
  if (limits.max_particles == 0) throw ParameterError("max_particles must be > 0");
  if (limits.max_events == 0) throw ParameterError("max_events must be > 0");
}

std::vector<TreeOutcome> simulate_tree_observed(const ModelParams& params,
                                                const InitialCondition& init,
                                                std::span<const double> checkpoints,
                                                const SimLimits& limits, RngStream& rng) {
  make_initial(init.x);
  validate_checkpoints(checkpoints);
  validate_limits(limits);

  const std::size_t n_obs = checkpoints.size();
  std::vector<std::vector<double>> recorded(n_obs);
  std::vector<TreeOutcome> outcomes(n_obs);
  std::size_t finalized = 0;

  std::size_t alive = 1;
  std::size_t max_alive = 1;
  std::size_t branch_events = 0;
  std::size_t events = 0;
  std::uint64_t next_id = 0;

  auto finalize_through = [&](double time) {
    while (finalized < n_obs && checkpoints[finalized] < time) {
      outcomes[finalized].branch_events = branch_events;
      outcomes[finalized].max_population = max_alive;
      ++finalized;
    }
  };

  // First checkpoint strictly after `t`; the last one bounds everything.
  auto next_checkpoint = [&](double t) {
    const auto it = std::upper_bound(checkpoints.begin(), checkpoints.end(), t);
    return it == checkpoints.end() ? checkpoints.back() : *it;
  };

  std::priority_queue<Pending, std::vector<Pending>, Later> queue;
  auto schedule = [&](double start, double position, double fission) {
    const double stop = next_checkpoint(start);
    queue.push({std::min(fission, stop), next_id++, start, position, fission, fission < stop});
  };

  std::size_t first_obs = 0;
  while (first_obs < n_obs && checkpoints[first_obs] == 0.0) {
    recorded[first_obs].push_back(init.x);
    ++first_obs;
  }
  if (first_obs < n_obs) schedule(0.0, init.x, rng.exponential(params.branch_rate));

  while (!queue.empty()) {
    const Pending p = queue.top();
    queue.pop();
    finalize_through(p.time);
    if (++events > limits.max_events) {
      throw BudgetError("event budget of " + std::to_string(limits.max_events) + " exceeded",
                        p.time);
    }

    const double dt = p.time - p.start_time;
    const double end = p.position - params.rho * dt + std::sqrt(dt) * rng.normal();
    // Given both endpoints the drift drops out: the segment is a driftless
    // Brownian bridge, which touches 0 with probability exp(-2 a b / dt).
    bool absorbed = end <= 0.0;
    if (!absorbed && dt > 0.0) {
      absorbed = rng.uniform() < std::exp(-2.0 * p.position * end / dt);
    }
    if (absorbed) {
      --alive;
      continue;
    }

    if (p.fission) {
      ++branch_events;
      ++alive;
      max_alive = std::max(max_alive, alive);
      if (alive > limits.max_particles) {
        throw ExplosionError("population exceeded " + std::to_string(limits.max_particles) +
                                 " particles",
                             p.time);
      }
      for (int child = 0; child < 2; ++child) {
        schedule(p.time, end, p.time + rng.exponential(params.branch_rate));
      }
      continue;
    }

    // Reached an observation time.
    const auto idx = static_cast<std::size_t>(
        std::lower_bound(checkpoints.begin(), checkpoints.end(), p.time) - checkpoints.begin());
    recorded[idx].push_back(end);
    if (idx + 1 < n_obs) schedule(p.time, end, p.fission_time);
  }
  finalize_through(std::numeric_limits<double>::infinity());

  for (std::size_t k = 0; k < n_obs; ++k) {
    outcomes[k].snapshot = PopulationSnapshot(checkpoints[k], std::move(recorded[k]));
    outcomes[k].extinct = outcomes[k].snapshot.empty();
  }
  return outcomes;
}

TreeOutcome simulate_tree(const ModelParams& params, const InitialCondition& init,
                          const Horizon& horizon, const SimLimits& limits, RngStream& rng) {
  make_horizon(horizon.t);
  const double checkpoint[1] = {horizon.t};
  return std::move(simulate_tree_observed(params, init, checkpoint, limits, rng).front());
}

ReplicateSummary summarize(const TreeOutcome& outcome, const ModelParams& params,
                           std::uint64_t stream_id) {
  ReplicateSummary s;
  s.stream_id = stream_id;
  s.alive = outcome.snapshot.alive();
  s.log_v_core = log_v_core(outcome.snapshot, params);
  s.branch_events = outcome.branch_events;
  s.max_population = outcome.max_population;
  return s;
}

std::vector<ReplicateSummary> simulate_replicates(const ModelParams& params,
                                                  const InitialCondition& init,
                                                  const Horizon& horizon, const SimLimits& limits,
                                                  const StreamFamily& family, std::size_t reps,
                                                  unsigned workers) {
  return parallel_map(reps, workers, [&](std::size_t i) {
    RngStream rng = family.stream(i);
    return summarize(simulate_tree(params, init, horizon, limits, rng), params, i);
  });
}

double drifted_survival_probability(double x, double t, double rho) {
  if (!(x > 0.0)) throw ParameterError("survival probability requires x > 0");
  if (!(t >= 0.0)) throw ParameterError("survival probability requires t >= 0");
  if (t == 0.0) return 1.0;
  // Phi((x - rho t)/sqrt t) - e^{2 rho x} Phi(-(x + rho t)/sqrt t), with the
  // large exponential folded into scaled erfc to avoid overflow.
  const double st2 = std::sqrt(2.0 * t);
  const double gauss = std::exp(-(x - rho * t) * (x - rho * t) / (2.0 * t));
  const double mirrored = 0.5 * stats::erfcx((x + rho * t) / st2) * gauss;
  if (rho * t > x) {
    const double direct = 0.5 * stats::erfcx((rho * t - x) / st2) * gauss;
    return std::max(0.0, direct - mirrored);
  }
  return std::max(0.0, stats::normal_cdf((x - rho * t) / std::sqrt(t)) - mirrored);
}

double expected_population(const InitialCondition& init, const Horizon& horizon,
                           const ModelParams& params) {
  make_initial(init.x);
  make_horizon(horizon.t);
  return std::exp(params.branch_rate * horizon.t) *
         drifted_survival_probability(init.x, horizon.t, params.rho);
}

ConditionalPopulationReport conditional_population_from(std::span<const ReplicateSummary> reps,
                                                        double ci_level, Manifest manifest) {
  if (reps.size() < 2) throw ParameterError("ratio estimator needs at least two replicates");
  const double n = static_cast<double>(reps.size());
  stats::RunningMoments count, survive;
  for (const auto& r : reps) {
    count.push(static_cast<double>(r.alive));
    survive.push(r.alive > 0 ? 1.0 : 0.0);
  }
  ConditionalPopulationReport out;
  out.numerator = make_report(count.mean(), count.std_error(), reps.size(), ci_level, manifest);
  out.denominator =
      make_report(survive.mean(), survive.std_error(), reps.size(), ci_level, manifest);
  if (survive.mean() == 0.0) {
    throw DegenerateEstimateError(
        "no replicate survived; survival estimate is 0 with Wilson upper bound " +
        std::to_string(stats::wilson_interval(0, reps.size(), ci_level).upper));
  }
  const double ratio = count.mean() / survive.mean();
  stats::RunningMoments resid;
  for (const auto& r : reps) {
    resid.push(static_cast<double>(r.alive) - ratio * (r.alive > 0 ? 1.0 : 0.0));
  }
  const double se = std::sqrt(resid.variance() / n) / survive.mean();
  out.ratio = make_report(ratio, se, reps.size(), ci_level, std::move(manifest));
  return out;
}

ConditionalPopulationReport conditional_population_naive(
    const ModelParams& params, const InitialCondition& init, const Horizon& horizon,
    std::size_t reps, const SimLimits& limits, const StreamFamily& family, unsigned workers,
    double ci_level) {
  if (reps < 1000) throw ParameterError("conditional_population_naive requires reps >= 1000");
  const auto summaries = simulate_replicates(params, init, horizon, limits, family, reps, workers);
  Manifest m{family.master_seed, params.epsilon, init.x, horizon.t, {"estimator: naive ratio"}};
  return conditional_population_from(summaries, ci_level, std::move(m));
}

}  // namespace spindle
