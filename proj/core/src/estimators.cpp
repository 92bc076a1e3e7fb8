#include "spindle/estimators.hpp"

#include <cmath>
#include <sstream>

#include "spindle/errors.hpp"
#include "spindle/parallel.hpp"
#include "spindle/stats.hpp"

namespace spindle {

stats::Interval EstimateReport::ci_at(double level) const {
  const double h = stats::z_for_level(level) * std_error;
  return {estimate - h, estimate + h};
}

EstimateReport make_report(double estimate, double std_error, std::size_t reps, double ci_level,
                           Manifest manifest) {
  if (reps == 0) throw ParameterError("an estimate needs at least one replicate");
  if (!(std_error >= 0.0)) throw ParameterError("standard error must be >= 0");
  EstimateReport r;
  r.estimate = estimate;
  r.std_error = std_error;
  r.reps = reps;
  r.ci_level = ci_level;
  r.half_width = stats::z_for_level(ci_level) * std_error;
  r.manifest = std::move(manifest);
  return r;
}

EstimateReport mc_mean_ci(std::span<const double> samples, double ci_level, Manifest manifest) {
  if (samples.size() < 2) throw ParameterError("mc_mean_ci needs at least two samples");
  stats::RunningMoments m;
  for (double s : samples) m.push(s);
  return make_report(m.mean(), m.std_error(), samples.size(), ci_level, std::move(manifest));
}

EstimateReport bernoulli_report(std::size_t successes, std::size_t n, double ci_level,
                                Manifest manifest) {
  if (successes > n) throw ParameterError("more successes than trials");
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  if (successes < 10) {
    const auto w = stats::wilson_interval(successes, n, ci_level);
    std::ostringstream note;
    note.precision(17);
    note << "wilson_interval: [" << w.lower << ", " << w.upper << "]";
    manifest.notes.push_back(note.str());
  }
  return make_report(p, se, n, ci_level, std::move(manifest));
}

std::vector<EstimateReport> survival_curve_naive(const ModelParams& params,
                                                 const InitialCondition& init,
                                                 std::span<const double> horizons,
                                                 std::size_t reps, const SimLimits& limits,
                                                 const StreamFamily& family, unsigned workers,
                                                 double ci_level) {
  if (reps < 1000) throw ParameterError("naive survival estimate requires reps >= 1000");
  make_initial(init.x);
  for (double t : horizons) make_horizon(t);
  const std::vector<double> checkpoints(horizons.begin(), horizons.end());

  const auto alive = parallel_map(reps, workers, [&](std::size_t i) {
    RngStream rng = family.stream(i);
    const auto obs = simulate_tree_observed(params, init, checkpoints, limits, rng);
    std::vector<bool> out(obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k) out[k] = !obs[k].extinct;
    return out;
  });

  std::vector<EstimateReport> reports;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    std::size_t successes = 0;
    for (const auto& a : alive) successes += a[k] ? 1 : 0;
    Manifest m{family.master_seed, params.epsilon, init.x, checkpoints[k],
               {"estimator: naive survival frequency"}};
    reports.push_back(bernoulli_report(successes, reps, ci_level, std::move(m)));
  }
  return reports;
}

EstimateReport survival_probability_naive(const ModelParams& params, const InitialCondition& init,
                                          const Horizon& horizon, std::size_t reps,
                                          const SimLimits& limits, const StreamFamily& family,
                                          unsigned workers, double ci_level) {
  const double t[1] = {horizon.t};
  return survival_curve_naive(params, init, t, reps, limits, family, workers, ci_level).front();
}

}  // namespace spindle
