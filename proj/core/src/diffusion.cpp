#include "spindle/diffusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "spindle/errors.hpp"
#include "spindle/stats.hpp"

namespace spindle {

namespace {

constexpr double kPi = std::numbers::pi;

void validate_grid(const std::vector<double>& grid, double duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ParameterError("bridge duration must be finite and > 0");
  }
  if (grid.size() < 2) throw ParameterError("grid needs at least two points");
  if (grid.front() != 0.0) throw ParameterError("grid must start at 0");
  if (grid.back() != duration) throw ParameterError("grid must end at the duration");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ParameterError("grid must be strictly increasing");
  }
}

// log of h_t(x, y) = p_t(x, y) / y^2, symmetric in (x, y) and finite at 0.
double log_reduced_density(double x, double y, double t) {
  const double w = 2.0 * x * y / t;
  const double log_g = w > 0.0 ? std::log(-std::expm1(-w) / w) : 0.0;
  const double d = y - x;
  return -0.5 * std::log(2.0 * kPi * t) - d * d / (2.0 * t) + std::log(2.0 / t) + log_g;
}

}  // namespace

std::vector<double> uniform_grid(double duration, std::size_t points) {
  if (points < 2) throw ParameterError("uniform grid needs at least two points");
  if (!(duration > 0.0)) throw ParameterError("grid duration must be > 0");
  std::vector<double> grid(points);
  const double n = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = duration * static_cast<double>(i) / n;
  grid.back() = duration;
  return grid;
}

void validate_bridge_spec(const BridgeSpec& spec, bool bessel) {
  validate_grid(spec.grid, spec.duration);
  if (!std::isfinite(spec.start) || !std::isfinite(spec.end)) {
    throw ParameterError("bridge endpoints must be finite");
  }
  if (bessel && (spec.start < 0.0 || spec.end < 0.0)) {
    throw ParameterError("Bessel bridge endpoints must be >= 0");
  }
}

std::vector<double> sample_standard_bridge(const std::vector<double>& grid, double duration,
                                           RngStream& rng) {
  validate_grid(grid, duration);
  std::vector<double> v(grid.size(), 0.0);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double rest_prev = duration - grid[i - 1];
    const double rest = duration - grid[i];
    const double step = grid[i] - grid[i - 1];
    const double mean = v[i - 1] * rest / rest_prev;
    const double sd = std::sqrt(step * rest / rest_prev);
    v[i] = mean + sd * rng.normal();
  }
  v.back() = 0.0;
  return v;
}

SamplePath shift_bridge(const std::vector<double>& standard, const BridgeSpec& spec) {
  if (standard.size() != spec.grid.size()) {
    throw ParameterError("standard bridge and grid lengths differ");
  }
  SamplePath path;
  path.grid = spec.grid;
  path.values.resize(standard.size());
  const double T = spec.duration;
  for (std::size_t i = 0; i < standard.size(); ++i) {
    const double r = spec.grid[i];
    path.values[i] = (T - r) / T * spec.start + r / T * spec.end + standard[i];
  }
  path.values.front() = spec.start;
  path.values.back() = spec.end;
  return path;
}

SamplePath sample_brownian_bridge(const BridgeSpec& spec, RngStream& rng) {
  validate_bridge_spec(spec, false);
  return shift_bridge(sample_standard_bridge(spec.grid, spec.duration, rng), spec);
}

double bridge_hits_zero_probability(double start, double end, double duration) {
  if (!(start > 0.0) || !(end > 0.0)) {
    throw ParameterError("bridge_hits_zero_probability requires start > 0 and end > 0");
  }
  if (!(duration > 0.0)) throw ParameterError("bridge duration must be > 0");
  return std::exp(-2.0 * start * end / duration);
}

double log_bessel_transition_density(double x, double y, double t) {
  if (!(t > 0.0)) throw ParameterError("Bessel density requires t > 0");
  if (!(y > 0.0)) throw ParameterError("Bessel density requires y > 0");
  if (!(x >= 0.0)) throw ParameterError("Bessel density requires x >= 0");
  return 2.0 * std::log(y) + log_reduced_density(x, y, t);
}

double bessel_transition_density(double x, double y, double t) {
  return std::exp(log_bessel_transition_density(x, y, t));
}

double bessel_transition_cdf(double x, double y, double t) {
  if (!(t > 0.0)) throw ParameterError("Bessel CDF requires t > 0");
  if (!(x >= 0.0)) throw ParameterError("Bessel CDF requires x >= 0");
  if (y <= 0.0) return 0.0;
  const double st = std::sqrt(t);
  auto phi = [t](double z) { return std::exp(-z * z / (2.0 * t)) / std::sqrt(2.0 * kPi * t); };
  if (x < 1e-5 * st) {
    // Maxwell law of |N(0, t I_3)|.
    return std::erf(y / (std::numbers::sqrt2 * st)) - 2.0 * y * phi(y);
  }
  const double value = stats::normal_cdf((y - x) / st) + stats::normal_cdf((y + x) / st) - 1.0 -
                       (t / x) * (phi(y - x) - phi(y + x));
  return std::clamp(value, 0.0, 1.0);
}

double bessel_bridge_density(double x, double total, double z, double s, double y) {
  if (!(total > 0.0)) throw ParameterError("bridge duration must be > 0");
  if (!(s > 0.0) || !(s < total)) throw ParameterError("bridge time s must lie in (0, total)");
  if (!(x >= 0.0) || !(z >= 0.0)) throw ParameterError("Bessel bridge endpoints must be >= 0");
  if (y <= 0.0) return 0.0;
  return std::exp(2.0 * std::log(y) + log_reduced_density(x, y, s) +
                  log_reduced_density(y, z, total - s) - log_reduced_density(x, z, total));
}

SamplePath sample_bessel3_path(double start, const std::vector<double>& grid, RngStream& rng) {
  if (!(start >= 0.0) || !std::isfinite(start)) {
    throw ParameterError("Bessel-3 start must be finite and >= 0");
  }
  if (grid.empty() || grid.front() != 0.0) throw ParameterError("grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ParameterError("grid must be strictly increasing");
  }
  SamplePath path;
  path.grid = grid;
  path.nonnegative = true;
  path.values.resize(grid.size());
  path.values[0] = start;
  std::array<double, 3> w = {start, 0.0, 0.0};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double sd = std::sqrt(grid[i] - grid[i - 1]);
    for (double& c : w) c += sd * rng.normal();
    path.values[i] = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  }
  return path;
}

SamplePath sample_bessel_bridge(const BridgeSpec& spec, RngStream& rng) {
  validate_bridge_spec(spec, true);
  const double T = spec.duration;
  const double kappa = spec.start * spec.end / T;
  // Terminal direction: cos(theta) ~ exp(kappa * c) on [-1, 1], azimuth uniform.
  const double u = rng.uniform();
  const double cos_theta =
      kappa > 0.0 ? 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa : 2.0 * u - 1.0;
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  const double azimuth = 2.0 * kPi * rng.uniform();
  const std::array<double, 3> terminal = {spec.end * cos_theta,
                                          spec.end * sin_theta * std::cos(azimuth),
                                          spec.end * sin_theta * std::sin(azimuth)};
  const std::array<double, 3> initial = {spec.start, 0.0, 0.0};

  std::array<std::vector<double>, 3> noise;
  for (auto& n : noise) n = sample_standard_bridge(spec.grid, T, rng);

  SamplePath path;
  path.grid = spec.grid;
  path.nonnegative = true;
  path.values.resize(spec.grid.size());
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    const double r = spec.grid[i];
    double norm2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double coord = (T - r) / T * initial[c] + r / T * terminal[c] + noise[c][i];
      norm2 += coord * coord;
    }
    path.values[i] = std::sqrt(norm2);
  }
  path.values.front() = spec.start;
  path.values.back() = spec.end;
  return path;
}

std::pair<SamplePath, SamplePath> couple_squared_bessel_bridges(const CoupledBridgeSpec& spec,
                                                                RngStream& rng) {
  if (spec.start_hi < spec.start_lo || spec.end_hi < spec.end_lo) {
    throw ParameterError("coupling requires hi endpoints >= lo endpoints");
  }
  if (spec.start_lo < 0.0 || spec.end_lo < 0.0) {
    throw ParameterError("squared Bessel bridge endpoints must be >= 0");
  }
  if (!(spec.extent > 0.0 && spec.extent < 1.0)) {
    throw ParameterError("integration extent 1 - delta must lie in (0, 1)");
  }
  if (spec.steps < 1) throw ParameterError("coupling needs at least one step");

  const std::vector<double> grid = uniform_grid(spec.extent, spec.steps + 1);
  const double dt = spec.extent / static_cast<double>(spec.steps);
  const double sdt = std::sqrt(dt);
  double x_hi = spec.start_hi;
  double x_lo = spec.start_lo;

  SamplePath hi, lo;
  hi.grid = grid;
  lo.grid = grid;
  hi.nonnegative = lo.nonnegative = true;
  hi.values.resize(grid.size());
  lo.values.resize(grid.size());
  hi.values[0] = spec.start_hi;
  lo.values[0] = spec.start_lo;

  // For Y > 0 the equation is, by Ito, dX = (1/X + (y - X)/(1 - r)) dr + dB
  // for X = sqrt(Y). One drift-implicit step solves
  //   (1 + c) X'^2 - (X + dB + c y) X' - dt = 0,   c = dt / (1 - r'),
  // for its positive root. The root increases with X and with y, so a shared
  // dB keeps the two solutions ordered exactly, as the comparison theorem
  // does in continuous time. Plain Euler on Y does not: its noise terms
  // 2 sqrt(Y) dB differ between the paths and can swap them.
  auto step = [dt](double x, double end, double r_next, double db) {
    const double c = dt / (1.0 - r_next);
    const double a = x + db + c * end;
    return (a + std::sqrt(a * a + 4.0 * (1.0 + c) * dt)) / (2.0 * (1.0 + c));
  };
  for (std::size_t k = 0; k < spec.steps; ++k) {
    const double db = sdt * rng.normal();
    const double r_next = grid[k + 1];
    x_hi = step(x_hi, spec.end_hi, r_next, db);
    x_lo = step(x_lo, spec.end_lo, r_next, db);
    hi.values[k + 1] = x_hi;
    lo.values[k + 1] = x_lo;
  }
  return {std::move(hi), std::move(lo)};
}

ProportionEstimate reflected_bridge_sup_mc(const LineBarrier& barrier, std::size_t grid_size,
                                           std::size_t reps, const StreamFamily& family) {
  const LineBarrier checked = make_barrier(barrier.a, barrier.b);
  if (grid_size < 2) throw ParameterError("grid_size must be >= 2");
  if (reps < 1) throw ParameterError("reps must be >= 1");
  const std::size_t n = grid_size;
  const double dt = 1.0 / static_cast<double>(n);
  // Sequential conditioning on a uniform grid: v_i = c_i v_{i-1} + s_i Z.
  std::vector<double> shrink(n), scale(n);
  for (std::size_t i = 1; i < n; ++i) {
    const double rest = static_cast<double>(n - i);
    const double rest_prev = static_cast<double>(n - i + 1);
    shrink[i] = rest / rest_prev;
    scale[i] = std::sqrt(dt * rest / rest_prev);
  }
  std::size_t below = 0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    RngStream rng = family.stream(rep);
    double v = 0.0;
    bool crossed = false;
    for (std::size_t i = 1; i < n; ++i) {
      v = shrink[i] * v + scale[i] * rng.normal();
      if (std::abs(v) - checked.a * static_cast<double>(i) * dt >= checked.b) {
        crossed = true;
        break;
      }
    }
    // Endpoint value is 0, so the endpoint never crosses since b > 0.
    if (!crossed) ++below;
  }
  const double p = static_cast<double>(below) / static_cast<double>(reps);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(reps)), reps};
}

void write_path_csv(std::ostream& out, const SamplePath& path) {
  out << "t,value\n";
  out.precision(17);
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    out << path.grid[i] << ',' << path.values[i] << '\n';
  }
}

}  // namespace spindle
