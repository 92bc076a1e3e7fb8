#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spindle/stats.hpp"

namespace spindle {

/// Provenance attached to every estimate.
struct Manifest {
  std::uint64_t master_seed = 0;
  double epsilon = 0.0;
  double x = 0.0;
  double horizon = 0.0;
  std::vector<std::string> notes;
};

struct EstimateReport {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  double ci_level = 0.95;
  double half_width = 0.0;
  Manifest manifest;

  stats::Interval ci() const noexcept { return {estimate - half_width, estimate + half_width}; }
  /// Interval at another confidence level using the same standard error.
  stats::Interval ci_at(double level) const;
};

/// Fills half_width = z(ci_level) * std_error. Throws ParameterError when
/// reps == 0 or std_error < 0.
EstimateReport make_report(double estimate, double std_error, std::size_t reps, double ci_level,
                           Manifest manifest = {});

}  // namespace spindle
