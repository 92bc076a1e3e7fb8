#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "spindle/rng.hpp"
#include "spindle/special_functions.hpp"

namespace spindle {

/// Bridge from `start` to `end` over [0, duration], observed on `grid`.
/// The grid is strictly increasing with grid.front() == 0 and
/// grid.back() == duration.
struct BridgeSpec {
  double start = 0.0;
  double end = 0.0;
  double duration = 1.0;
  std::vector<double> grid;
};

/// Values of a path on a time grid. `nonnegative` marks Bessel-type paths.
struct SamplePath {
  std::vector<double> grid;
  std::vector<double> values;
  bool nonnegative = false;

  std::size_t size() const noexcept { return values.size(); }
  double terminal() const { return values.back(); }
};

/// `points` equally spaced times covering [0, duration] (points >= 2).
std::vector<double> uniform_grid(double duration, std::size_t points);

/// Throws ParameterError when the grid is not strictly increasing from 0 to
/// `duration`, or (for Bessel objects) when an endpoint is negative.
void validate_bridge_spec(const BridgeSpec& spec, bool bessel);

/// Standard 0 -> 0 bridge over [0, duration] on `grid`, by sequential
/// Gaussian conditioning. Values at both ends are exactly 0.
std::vector<double> sample_standard_bridge(const std::vector<double>& grid, double duration,
                                           RngStream& rng);

/// Applies the linear shift (duration - r)/duration * start + r/duration * end
/// to a standard bridge. Two specs sharing the same `standard` noise are
/// ordered pointwise whenever their endpoints are ordered.
SamplePath shift_bridge(const std::vector<double>& standard, const BridgeSpec& spec);

/// Brownian bridge from spec.start to spec.end (any sign); endpoints exact.
SamplePath sample_brownian_bridge(const BridgeSpec& spec, RngStream& rng);

/// Probability that a Brownian bridge from `start` > 0 to `end` > 0 over
/// `duration` touches 0: exp(-2 start end / duration).
double bridge_hits_zero_probability(double start, double end, double duration);

/// Bessel-3 transition density p_t(x, y) for x >= 0, y > 0, t > 0. The x = 0
/// case is the limit sqrt(2 / (pi t^3)) y^2 exp(-y^2 / (2t)).
double bessel_transition_density(double x, double y, double t);
double log_bessel_transition_density(double x, double y, double t);

/// Closed-form CDF of p_t(x, .) on [0, y].
double bessel_transition_cdf(double x, double y, double t);

/// Density at y of the Bessel-3 bridge x -> z over [0, total] at time s:
/// p_s(x, y) p_{total-s}(y, z) / p_total(x, z). Endpoints may be 0.
double bessel_bridge_density(double x, double total, double z, double s, double y);

/// Bessel-3 path from `start` on `grid` (grid.front() == 0), realised as the
/// norm of a three-dimensional Brownian motion started at (start, 0, 0).
SamplePath sample_bessel3_path(double start, const std::vector<double>& grid, RngStream& rng);

/// Bessel-3 bridge from spec.start to spec.end, exact at grid points.
///
/// Uses three independent standard bridges: the path is the norm of a 3-d
/// Brownian bridge from (start, 0, 0) to end * d, where the unit vector d is
/// drawn from the von Mises-Fisher law with concentration
/// start * end / duration about the first axis. That is the law of the
/// terminal point of a 3-d Brownian motion given its norm, which makes the
/// norm an exact Bessel bridge. When either endpoint is 0 the direction is
/// irrelevant and this reduces to the plain three-bridge representation.
SamplePath sample_bessel_bridge(const BridgeSpec& spec, RngStream& rng);

/// Squared Bessel bridges over unit time driven by one Brownian motion,
/// integrated on [0, extent] with extent = 1 - delta.
struct CoupledBridgeSpec {
  double start_hi = 1.0;
  double end_hi = 1.0;
  double start_lo = 0.5;
  double end_lo = 0.5;
  double extent = 0.9;
  std::size_t steps = 4096;
};

/// Solves dY = (3 + (2 y sqrt(Y) - 2 Y) / (1 - r)) dr + 2 sqrt(Y) dB for both
/// bridges with shared increments; returns (sqrt(Y_hi), sqrt(Y_lo)) on the
/// step grid. Stepping is drift-implicit in sqrt(Y), which keeps every value
/// positive and the pair ordered at every step.
std::pair<SamplePath, SamplePath> couple_squared_bessel_bridges(const CoupledBridgeSpec& spec,
                                                                RngStream& rng);

struct ProportionEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
};

/// Frequency with which max_i (|B(t_i)| - a t_i) < b for a standard bridge on
/// grid_size equal steps of [0, 1]; replicate i uses family.stream(i).
ProportionEstimate reflected_bridge_sup_mc(const LineBarrier& barrier, std::size_t grid_size,
                                           std::size_t reps, const StreamFamily& family);

/// Writes `t,value` CSV, one row per grid point.
void write_path_csv(std::ostream& out, const SamplePath& path);

}  // namespace spindle
