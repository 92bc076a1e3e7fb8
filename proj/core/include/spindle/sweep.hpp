#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spindle/bbm.hpp"
#include "spindle/report.hpp"

namespace spindle {

struct SweepGrid {
  std::vector<double> epsilons;
  std::vector<double> horizons;
  std::size_t reps_per_cell = 0;
};

/// epsilon in {0.6, 0.4, 0.25}, t = 6, 10^5 replicates.
SweepGrid default_sweep_grid();

/// Throws ParameterError on empty lists, out-of-range values or reps < 1000.
void validate_sweep_grid(const SweepGrid& grid);

/// Cells below this many replicates are reported as inconclusive.
inline constexpr std::size_t kSweepMinPoweredReps = 10'000;

enum class CellStatus { ok, inconclusive, failed };

const char* to_string(CellStatus status) noexcept;

struct SweepRow {
  double epsilon = 0.0;
  double t = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  CellStatus status = CellStatus::ok;
  std::string error;  // set when status == failed
  std::optional<EstimateReport> keps;
  std::optional<EstimateReport> cond_pop_naive;
  std::optional<EstimateReport> cond_pop_spine;
  std::optional<EstimateReport> survival_naive;

  /// log of the naive conditional-population estimate (NaN when missing).
  double log_cond_pop_naive() const noexcept;
  double log_cond_pop_spine() const noexcept;
};

/// One row per (epsilon, t) cell, epsilons outermost. Cell k is seeded with
/// derive_seed(master_seed, k); its naive and spine runs use the tags 1 and 2
/// below that. A cell whose simulation faults is recorded and skipped.
std::vector<SweepRow> yaglom_sweep(const SweepGrid& grid, const InitialCondition& init,
                                   const SimLimits& limits, std::uint64_t master_seed,
                                   unsigned workers = 1, double ci_level = 0.95);

/// Header `epsilon,t,keps,keps_se,cond_pop_naive,cond_pop_naive_se,cond_pop_spine,reps,seed`;
/// missing values are written as `nan`. Numbers use 17 significant digits.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace spindle
