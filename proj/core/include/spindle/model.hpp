#pragma once

#include <span>
#include <vector>

namespace spindle {

/// Parameterisation of branching Brownian motion with absorption at 0.
///
/// Particles drift at -rho, split into two at `branch_rate`, and are killed
/// on reaching the origin. `rho` is always derived from `epsilon` through
/// rho^2 / 2 - 1 = epsilon; construct through make_params().
struct ModelParams {
  double epsilon = 0.0;
  double rho = 0.0;
  double branch_rate = 1.0;

  bool operator==(const ModelParams&) const = default;
};

/// Builds parameters for subcriticality `epsilon` in (0, 1) with unit
/// branching rate. Throws ParameterError naming the violated bound.
ModelParams make_params(double epsilon);

/// Same as make_params but with an explicit branching rate. A rate of 0 is
/// accepted so tests can exercise the single-particle motion in isolation.
ModelParams make_params(double epsilon, double branch_rate);

struct InitialCondition {
  double x = 1.0;
};

/// Throws ParameterError unless x > 0 and finite.
InitialCondition make_initial(double x);

struct Horizon {
  double t = 0.0;
};

/// Throws ParameterError unless t >= 0 and finite.
Horizon make_horizon(double t);

/// Positions of the surviving particles at a fixed time. Positions are kept
/// sorted ascending and are all strictly positive.
class PopulationSnapshot {
 public:
  PopulationSnapshot() = default;
  PopulationSnapshot(double time, std::vector<double> positions);

  double time() const noexcept { return time_; }
  std::span<const double> positions() const noexcept { return positions_; }
  std::size_t alive() const noexcept { return positions_.size(); }
  bool empty() const noexcept { return positions_.empty(); }

  /// Union of two snapshots taken at the same time.
  PopulationSnapshot merged_with(const PopulationSnapshot& other) const;

 private:
  double time_ = 0.0;
  std::vector<double> positions_;
};

/// log(sum_u Y_u * exp(rho * Y_u)) over the snapshot, evaluated by
/// log-sum-exp. Returns -infinity for an empty snapshot. The exp(epsilon * t)
/// factor of the additive martingale is left to the caller.
double log_v_core(const PopulationSnapshot& snapshot, const ModelParams& params);

/// Same, over a raw list of positive positions.
double log_v_core(std::span<const double> positions, double rho);

/// Numerically stable log(exp(a) + exp(b)); -infinity is the neutral element.
double log_add_exp(double a, double b) noexcept;

/// log V(t) = log_v_core + epsilon * t.
double log_martingale(const PopulationSnapshot& snapshot, const ModelParams& params);

}  // namespace spindle
