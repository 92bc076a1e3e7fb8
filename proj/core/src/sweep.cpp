#include "spindle/sweep.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "spindle/errors.hpp"
#include "spindle/estimators.hpp"
#include "spindle/spine.hpp"

namespace spindle {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_or_nan(const std::optional<EstimateReport>& r) {
  return r && r->estimate > 0.0 ? std::log(r->estimate) : kNaN;
}

}  // namespace

SweepGrid default_sweep_grid() { return SweepGrid{{0.6, 0.4, 0.25}, {6.0}, 100'000}; }

void validate_sweep_grid(const SweepGrid& grid) {
  if (grid.epsilons.empty()) throw ParameterError("sweep needs at least one epsilon");
  if (grid.horizons.empty()) throw ParameterError("sweep needs at least one horizon");
  for (double e : grid.epsilons) make_params(e);
  for (double t : grid.horizons) {
    make_horizon(t);
    if (t == 0.0) throw ParameterError("sweep horizons must be > 0");
  }
  if (grid.reps_per_cell < 1000) throw ParameterError("sweep needs reps_per_cell >= 1000");
}

const char* to_string(CellStatus status) noexcept {
  switch (status) {
    case CellStatus::ok: return "ok";
    case CellStatus::inconclusive: return "inconclusive";
    case CellStatus::failed: return "failed";
  }
  return "failed";
}

double SweepRow::log_cond_pop_naive() const noexcept { return log_or_nan(cond_pop_naive); }
double SweepRow::log_cond_pop_spine() const noexcept { return log_or_nan(cond_pop_spine); }

std::vector<SweepRow> yaglom_sweep(const SweepGrid& grid, const InitialCondition& init,
                                   const SimLimits& limits, std::uint64_t master_seed,
                                   unsigned workers, double ci_level) {
  validate_sweep_grid(grid);
  make_initial(init.x);
  validate_limits(limits);

  std::vector<SweepRow> rows;
  std::uint64_t cell = 0;
  for (double eps : grid.epsilons) {
    for (double t : grid.horizons) {
      SweepRow row;
      row.epsilon = eps;
      row.t = t;
      row.reps = grid.reps_per_cell;
      row.seed = derive_seed(master_seed, cell++);
      const ModelParams params = make_params(eps);
      const Horizon horizon{t};
      try {
        const StreamFamily naive{derive_seed(row.seed, 1)};
        const StreamFamily spine{derive_seed(row.seed, 2)};
        const auto pop = conditional_population_naive(params, init, horizon, row.reps, limits,
                                                      naive, workers, ci_level);
        row.cond_pop_naive = pop.ratio;
        row.survival_naive = pop.denominator;
        row.keps = keps_estimate(params, init, horizon, row.reps, limits, spine, workers, ci_level);
        row.cond_pop_spine = implied_conditional_population(*row.keps, params);
        row.status = row.reps < kSweepMinPoweredReps ? CellStatus::inconclusive : CellStatus::ok;
      } catch (const SimulationError& e) {
        row.status = CellStatus::failed;
        row.error = e.what();
      } catch (const DegenerateEstimateError& e) {
        row.status = CellStatus::failed;
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  const auto old_precision = out.precision(17);
  auto num = [&](double v) -> std::ostream& {
    if (std::isnan(v)) return out << "nan";
    return out << v;
  };
  auto est = [](const std::optional<EstimateReport>& r) { return r ? r->estimate : kNaN; };
  auto se = [](const std::optional<EstimateReport>& r) { return r ? r->std_error : kNaN; };

  out << "epsilon,t,keps,keps_se,cond_pop_naive,cond_pop_naive_se,cond_pop_spine,reps,seed\n";
  for (const auto& r : rows) {
    num(r.epsilon) << ',';
    num(r.t) << ',';
    num(est(r.keps)) << ',';
    num(se(r.keps)) << ',';
    num(est(r.cond_pop_naive)) << ',';
    num(se(r.cond_pop_naive)) << ',';
    num(est(r.cond_pop_spine)) << ',';
    out << r.reps << ',' << r.seed << '\n';
  }
  out.precision(old_precision);
}

}  // namespace spindle
