#include "spindle/spine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spindle/errors.hpp"
#include "spindle/parallel.hpp"
#include "spindle/stats.hpp"

namespace spindle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Runs one ordinary subtree, tagging simulation faults with its birth time.
TreeOutcome run_subtree(const ModelParams& params, double position, double remaining,
                        double birth, const SimLimits& limits, RngStream& rng) {
  try {
    return simulate_tree(params, InitialCondition{position}, Horizon{remaining}, limits, rng);
  } catch (const ExplosionError& e) {
    throw ExplosionError(std::string(e.what()) + " (subtree branched off the spine at t=" +
                             std::to_string(birth) + ")",
                         birth + e.time_reached());
  } catch (const BudgetError& e) {
    throw BudgetError(std::string(e.what()) + " (subtree branched off the spine at t=" +
                          std::to_string(birth) + ")",
                      birth + e.time_reached());
  }
}

std::vector<double> poisson_times(double from, double to, double rate, RngStream& rng) {
  std::vector<double> times;
  if (rate <= 0.0) return times;
  double t = from + rng.exponential(rate);
  while (t < to) {
    times.push_back(t);
    t += rng.exponential(rate);
  }
  return times;
}

}  // namespace

QTreeOutcome sample_q_tree(const ModelParams& params, const InitialCondition& init,
                           const Horizon& horizon, const SimLimits& limits, RngStream& rng,
                           std::optional<double> endpoint) {
  make_initial(init.x);
  make_horizon(horizon.t);
  validate_limits(limits);
  if (endpoint && !(*endpoint > 0.0)) throw ParameterError("spine endpoint must be > 0");

  QTreeOutcome out;
  const double t = horizon.t;
  if (t == 0.0) {
    out.spine.spine_path.grid = {0.0};
    out.spine.spine_path.values = {init.x};
    out.spine.spine_path.nonnegative = true;
    out.merged_snapshot = PopulationSnapshot(0.0, {init.x});
    return out;
  }

  // Under the size-biased law the spine sheds one ordinary subtree per
  // fission; which child carries the spine does not affect the population.
  SpineRealization& spine = out.spine;
  spine.branch_times = poisson_times(0.0, t, 2.0 * params.branch_rate, rng);

  std::vector<double> grid;
  grid.reserve(spine.branch_times.size() + 2);
  grid.push_back(0.0);
  grid.insert(grid.end(), spine.branch_times.begin(), spine.branch_times.end());
  grid.push_back(t);

  if (endpoint) {
    spine.spine_path = sample_bessel_bridge(BridgeSpec{init.x, *endpoint, t, grid}, rng);
  } else {
    spine.spine_path = sample_bessel3_path(init.x, grid, rng);
  }
  spine.branch_positions.assign(spine.spine_path.values.begin() + 1,
                                spine.spine_path.values.end() - 1);

  std::vector<double> positions{spine.spine_path.terminal()};
  for (std::size_t i = 0; i < spine.branch_times.size(); ++i) {
    const double birth = spine.branch_times[i];
    const TreeOutcome sub =
        run_subtree(params, spine.branch_positions[i], t - birth, birth, limits, rng);
    const auto pos = sub.snapshot.positions();
    positions.insert(positions.end(), pos.begin(), pos.end());
  }
  out.subtree_count = spine.branch_times.size();
  out.merged_snapshot = PopulationSnapshot(t, std::move(positions));
  return out;
}

std::vector<QReplicateSummary> simulate_q_replicates(const ModelParams& params,
                                                     const InitialCondition& init,
                                                     const Horizon& horizon,
                                                     const SimLimits& limits,
                                                     const StreamFamily& family, std::size_t reps,
                                                     unsigned workers,
                                                     std::optional<double> endpoint) {
  return parallel_map(reps, workers, [&](std::size_t i) {
    RngStream rng = family.stream(i);
    const QTreeOutcome q = sample_q_tree(params, init, horizon, limits, rng, endpoint);
    QReplicateSummary s;
    s.stream_id = i;
    s.branch_count = q.subtree_count;
    s.spine_terminal = q.spine.spine_path.terminal();
    s.log_v_core = log_v_core(q.merged_snapshot, params);
    s.alive = q.merged_snapshot.alive();
    return s;
  });
}

EstimateReport keps_from(std::span<const QReplicateSummary> reps, double horizon, double ci_level,
                         Manifest manifest) {
  if (reps.size() < 2) throw ParameterError("K estimate needs at least two replicates");
  stats::RunningMoments m;
  for (const auto& r : reps) m.push(std::exp(-r.log_v_core));
  const double scale = std::sqrt(2.0 * std::numbers::pi * horizon * horizon * horizon);
  return make_report(scale * m.mean(), scale * m.std_error(), reps.size(), ci_level,
                     std::move(manifest));
}

EstimateReport keps_estimate(const ModelParams& params, const InitialCondition& init,
                             const Horizon& horizon, std::size_t reps, const SimLimits& limits,
                             const StreamFamily& family, unsigned workers, double ci_level) {
  if (reps < 1000) throw ParameterError("keps_estimate requires reps >= 1000");
  const auto q = simulate_q_replicates(params, init, horizon, limits, family, reps, workers);
  Manifest m{family.master_seed, params.epsilon, init.x, horizon.t, {"estimator: spine"}};
  return keps_from(q, horizon.t, ci_level, std::move(m));
}

EstimateReport implied_survival(const EstimateReport& keps, const ModelParams& params,
                                const InitialCondition& init, const Horizon& horizon) {
  if (!(horizon.t > 0.0)) throw ParameterError("implied survival requires t > 0");
  const double t = horizon.t;
  const double scale = init.x * std::exp(params.rho * init.x - params.epsilon * t) /
                       std::sqrt(2.0 * std::numbers::pi * t * t * t);
  return make_report(keps.estimate * scale, keps.std_error * scale, keps.reps, keps.ci_level,
                     keps.manifest);
}

EstimateReport implied_conditional_population(const EstimateReport& keps,
                                              const ModelParams& params) {
  if (!(keps.estimate > 0.0)) throw DegenerateEstimateError("K estimate must be > 0");
  const double r2 = params.rho * params.rho;
  const double value = 2.0 / (r2 * keps.estimate);
  const double se = 2.0 / (r2 * keps.estimate * keps.estimate) * keps.std_error;
  return make_report(value, se, keps.reps, keps.ci_level, keps.manifest);
}

std::vector<std::string> registered_functionals() { return {"one", "min_n_10", "survive"}; }

double evaluate_functional(const std::string& id, std::size_t population) {
  if (id == "one") return 1.0;
  if (id == "min_n_10") return static_cast<double>(std::min<std::size_t>(population, 10));
  if (id == "survive") return population > 0 ? 1.0 : 0.0;
  throw RegistryError("unknown population functional '" + id + "'");
}

std::pair<EstimateReport, EstimateReport> radon_nikodym_check(
    const std::string& functional_id, const ModelParams& params, const InitialCondition& init,
    const Horizon& horizon, std::size_t reps, const StreamFamily& family, unsigned workers,
    const SimLimits& limits, double ci_level) {
  evaluate_functional(functional_id, 0);
  if (reps < 2) throw ParameterError("radon_nikodym_check requires reps >= 2");
  const StreamFamily p_family{derive_seed(family.master_seed, 1)};
  const StreamFamily q_family{derive_seed(family.master_seed, 2)};

  const auto p_side = simulate_replicates(params, init, horizon, limits, p_family, reps, workers);
  const auto q_side = simulate_q_replicates(params, init, horizon, limits, q_family, reps, workers);

  const double log_v0 = std::log(init.x) + params.rho * init.x;
  stats::RunningMoments p_moments, q_moments;
  for (const auto& r : p_side) {
    const double weight =
        r.alive == 0 ? 0.0 : std::exp(r.log_v_core + params.epsilon * horizon.t - log_v0);
    p_moments.push(evaluate_functional(functional_id, r.alive) * weight);
  }
  for (const auto& r : q_side) q_moments.push(evaluate_functional(functional_id, r.alive));

  Manifest m{family.master_seed, params.epsilon, init.x, horizon.t,
             {"functional: " + functional_id}};
  Manifest mp = m, mq = m;
  mp.notes.push_back("side: P, weighted by V(t)/V(0)");
  mq.notes.push_back("side: Q");
  return {make_report(p_moments.mean(), p_moments.std_error(), reps, ci_level, std::move(mp)),
          make_report(q_moments.mean(), q_moments.std_error(), reps, ci_level, std::move(mq))};
}

double log_spine_additive_functional(const SamplePath& spine, const ModelParams& params,
                                     std::optional<double> window) {
  const auto& grid = spine.grid;
  const auto& xi = spine.values;
  if (grid.size() < 8 || xi.size() != grid.size()) {
    throw ParameterError("spine grid too coarse for the trapezoid rule (need >= 8 points)");
  }
  const double t = grid.back();
  const double w = window.value_or(t - grid.front());
  if (!(w >= 0.0) || w > t - grid.front()) {
    throw ParameterError("window must lie within the spine's time range");
  }
  const double terminal = xi.back();
  const double log_terminal = terminal > 0.0 ? std::log(terminal) + params.rho * terminal : kNegInf;
  if (w == 0.0 || params.branch_rate == 0.0) return log_terminal;

  auto log_f = [&](double r, double x) {
    return x > 0.0 ? std::log(x) + params.rho * x - params.epsilon * (t - r) : kNegInf;
  };

  // Trapezoid pieces clipped to [t - w, t], as (log f_left, log f_right, width).
  const double from = t - w;
  struct Piece {
    double lf0, lf1, width;
  };
  std::vector<Piece> pieces;
  double top = kNegInf;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    double r0 = grid[i], r1 = grid[i + 1];
    if (r1 <= from) continue;
    double x0 = xi[i];
    if (r0 < from) {
      const double lambda = (from - r0) / (r1 - r0);
      x0 = xi[i] + lambda * (xi[i + 1] - xi[i]);
      r0 = from;
    }
    Piece p{log_f(r0, x0), log_f(r1, xi[i + 1]), r1 - r0};
    top = std::max({top, p.lf0, p.lf1});
    pieces.push_back(p);
  }
  if (top == kNegInf) return log_terminal;
  double acc = 0.0;
  for (const auto& p : pieces) {
    acc += 0.5 * p.width * (std::exp(p.lf0 - top) + std::exp(p.lf1 - top));
  }
  const double log_integral = std::log(2.0 * params.branch_rate) + top + std::log(acc);
  return log_add_exp(log_integral, log_terminal);
}

double spine_additive_functional(const SamplePath& spine, const ModelParams& params,
                                 std::optional<double> window) {
  return std::exp(log_spine_additive_functional(spine, params, window));
}

double spine_additive_functional(const SpineRealization& spine, const ModelParams& params) {
  return spine_additive_functional(spine.spine_path, params);
}

PopulationSnapshot resample_subtrees(const SamplePath& spine, const ModelParams& params,
                                     const SimLimits& limits, RngStream& rng) {
  const auto& grid = spine.grid;
  const auto& xi = spine.values;
  if (grid.size() < 2 || xi.size() != grid.size()) throw ParameterError("spine path too short");
  const double t = grid.back();
  std::vector<double> positions;
  if (xi.back() > 0.0) positions.push_back(xi.back());
  for (double birth : poisson_times(grid.front(), t, 2.0 * params.branch_rate, rng)) {
    const auto it = std::upper_bound(grid.begin(), grid.end(), birth);
    const std::size_t j = static_cast<std::size_t>(it - grid.begin());
    const double lambda = (birth - grid[j - 1]) / (grid[j] - grid[j - 1]);
    const double x = xi[j - 1] + lambda * (xi[j] - xi[j - 1]);
    if (!(x > 0.0)) continue;
    const TreeOutcome sub = run_subtree(params, x, t - birth, birth, limits, rng);
    const auto pos = sub.snapshot.positions();
    positions.insert(positions.end(), pos.begin(), pos.end());
  }
  return PopulationSnapshot(t, std::move(positions));
}

}  // namespace spindle
