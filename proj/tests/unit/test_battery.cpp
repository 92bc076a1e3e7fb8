#include <gtest/gtest.h>

#include <algorithm>

#include "spindle/battery.hpp"
#include "spindle/errors.hpp"

using namespace spindle;

namespace {

bool any_fail(const std::vector<CheckResult>& rs) {
  return std::any_of(rs.begin(), rs.end(), [](const auto& r) { return r.verdict == Verdict::fail; });
}

}  // namespace

TEST(Battery, DefaultRunPasses) {
  const auto rs = lemma_battery();
  ASSERT_FALSE(rs.empty());
  for (const auto& r : rs) {
    EXPECT_EQ(r.verdict, Verdict::pass) << r.group << "/" << r.name << ": " << r.detail;
  }
  for (const auto& g : battery_groups()) {
    EXPECT_TRUE(std::any_of(rs.begin(), rs.end(), [&](const auto& r) { return r.group == g; })) << g;
  }
}

TEST(Battery, OnlySelectsGroups) {
  BatteryOptions o;
  o.only = {"theta", "poisson"};
  for (const auto& r : lemma_battery(o)) EXPECT_TRUE(r.group == "theta" || r.group == "poisson");
}

TEST(Battery, InjectedFaultIsCaught) {
  BatteryOptions o;
  o.only = {"theta"};
  o.fault = BatteryFault::drop_theta_k2;
  EXPECT_TRUE(any_fail(lemma_battery(o)));
}

TEST(Battery, UnderpoweredIsInconclusiveNotFail) {
  BatteryOptions o;
  o.reps = 100;
  o.only = {"excursion", "time_reversal", "dominance", "martingale", "prefix_max"};
  const auto rs = lemma_battery(o);
  EXPECT_FALSE(any_fail(rs));
  EXPECT_TRUE(std::any_of(rs.begin(), rs.end(), [](const auto& r) { return r.verdict == Verdict::inconclusive; }));
}

TEST(Battery, UnknownGroup) {
  BatteryOptions o;
  o.only = {"nonsense"};
  EXPECT_THROW(lemma_battery(o), ParameterError);
}
