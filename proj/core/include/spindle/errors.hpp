#pragma once

#include <stdexcept>
#include <string>

namespace spindle {

/// Raised when an input violates a documented domain (epsilon range, negative
/// durations, unsorted grids, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for faults raised while running a simulation engine.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, double time_reached)
      : std::runtime_error(what), time_reached_(time_reached) {}

  double time_reached() const noexcept { return time_reached_; }

 private:
  double time_reached_;
};

/// Population exceeded SimLimits::max_particles.
class ExplosionError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Event count exceeded SimLimits::max_events.
class BudgetError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// A ratio estimator had nothing to divide by (e.g. no surviving replicate).
class DegenerateEstimateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown functional id passed to the measure-change check.
class RegistryError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace spindle
