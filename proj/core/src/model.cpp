#include "spindle/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spindle/errors.hpp"

namespace spindle {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ModelParams make_params(double epsilon) { return make_params(epsilon, 1.0); }

ModelParams make_params(double epsilon, double branch_rate) {
  if (!(epsilon > 0.0)) {
    throw ParameterError("epsilon must be > 0 (got " + std::to_string(epsilon) + ")");
  }
  if (!(epsilon < 1.0)) {
    throw ParameterError("epsilon must be < 1 (got " + std::to_string(epsilon) + ")");
  }
  if (!(branch_rate >= 0.0) || !std::isfinite(branch_rate)) {
    throw ParameterError("branch_rate must be finite and >= 0");
  }
  ModelParams p;
  p.epsilon = epsilon;
  p.rho = std::sqrt(2.0 + 2.0 * epsilon);
  p.branch_rate = branch_rate;
  return p;
}

InitialCondition make_initial(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw ParameterError("initial position x must be finite and > 0");
  }
  return InitialCondition{x};
}

Horizon make_horizon(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw ParameterError("horizon t must be finite and >= 0");
  }
  return Horizon{t};
}

PopulationSnapshot::PopulationSnapshot(double time, std::vector<double> positions)
    : time_(time), positions_(std::move(positions)) {
  for (double y : positions_) {
    if (!(y > 0.0)) throw ParameterError("snapshot positions must be > 0");
  }
  std::sort(positions_.begin(), positions_.end());
}

PopulationSnapshot PopulationSnapshot::merged_with(const PopulationSnapshot& other) const {
  std::vector<double> all;
  all.reserve(positions_.size() + other.positions_.size());
  std::merge(positions_.begin(), positions_.end(), other.positions_.begin(),
             other.positions_.end(), std::back_inserter(all));
  PopulationSnapshot out;
  out.time_ = time_;
  out.positions_ = std::move(all);
  return out;
}

double log_add_exp(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double log_v_core(std::span<const double> positions, double rho) {
  if (positions.empty()) return kNegInf;
  double top = kNegInf;
  for (double y : positions) top = std::max(top, std::log(y) + rho * y);
  double acc = 0.0;
  for (double y : positions) acc += std::exp(std::log(y) + rho * y - top);
  return top + std::log(acc);
}

double log_v_core(const PopulationSnapshot& snapshot, const ModelParams& params) {
  return log_v_core(snapshot.positions(), params.rho);
}

double log_martingale(const PopulationSnapshot& snapshot, const ModelParams& params) {
  return log_v_core(snapshot, params) + params.epsilon * snapshot.time();
}

}  // namespace spindle
