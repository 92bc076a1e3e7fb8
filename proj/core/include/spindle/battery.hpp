#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spindle {

enum class Verdict { pass, fail, inconclusive };

const char* to_string(Verdict verdict) noexcept;

struct CheckResult {
  std::string name;
  std::string group;
  Verdict verdict = Verdict::pass;
  double statistic = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Deliberate implementation faults, used to show the battery catches them.
enum class BatteryFault { none, drop_theta_k2 };

struct BatteryOptions {
  std::uint64_t seed = 20'240'917;
  /// Overrides every statistical check's replicate count.
  std::optional<std::size_t> reps;
  /// Group names to run; empty runs everything.
  std::vector<std::string> only;
  BatteryFault fault = BatteryFault::none;
  unsigned workers = 1;
};

/// Statistical checks run with fewer replicates than this are inconclusive.
inline constexpr std::size_t kMinPoweredReps = 1000;

/// theta, bridge_sup, bridge_sup_mc, poisson, gaussian, prefix_max,
/// bessel_density, excursion, time_reversal, dominance, convergence,
/// martingale, survival_bound.
std::vector<std::string> battery_groups();

/// Runs the checks of the selected groups with fixed seeds. Failures are
/// returned as data; only an unknown group name throws (ParameterError).
std::vector<CheckResult> lemma_battery(const BatteryOptions& options = {});

}  // namespace spindle
