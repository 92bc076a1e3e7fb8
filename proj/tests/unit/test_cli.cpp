#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spindle_cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using spindle::cli::run;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("spindle_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("SPINDLE_WORKERS");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv("SPINDLE_WORKERS");
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int call(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

json load(const std::string& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_F(CliTest, SimulateWritesOneRecordPerReplicate) {
  const auto out = path("sim.jsonl");
  ASSERT_EQ(call({"simulate", "--epsilon", "0.5", "--x", "1.0", "--t", "2.0", "--reps", "100000", "--seed", "7",
                  "--out", out}),
            0)
      << err_.str();
  const std::string body = slurp(out);
  EXPECT_EQ(count_lines(body), 100001u);
  const auto first = json::parse(body.substr(0, body.find('\n')));
  EXPECT_EQ(first["type"], "manifest");
  EXPECT_EQ(first["manifest"]["config"]["seed"], 7);
  const auto summary = load(out + ".summary.json");
  EXPECT_GT(summary["survival_probability"]["estimate"].get<double>(), 0.0);
}

TEST_F(CliTest, RerunIsByteIdentical) {
  const auto a = path("a.jsonl"), b = path("b.jsonl"), c = path("c.jsonl");
  const std::vector<std::string> base{"simulate", "--epsilon", "0.4", "--x", "1.5", "--t", "3", "--reps", "5000"};
  auto with = [&](const std::string& out, std::vector<std::string> extra) {
    auto v = base;
    v.insert(v.end(), {"--out", out});
    v.insert(v.end(), extra.begin(), extra.end());
    return v;
  };
  ASSERT_EQ(call(with(a, {"--workers", "1"})), 0);
  ASSERT_EQ(call(with(b, {"--workers", "4"})), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a + ".summary.json"), slurp(b + ".summary.json"));
  // Replay from the manifest line of the first output.
  setenv("SPINDLE_WORKERS", "3", 1);
  ASSERT_EQ(call({"simulate", "--config", a, "--out", c}), 0) << err_.str();
  EXPECT_EQ(slurp(a), slurp(c));
}

TEST_F(CliTest, InvalidEpsilonWritesNothing) {
  const auto out = path("bad.jsonl");
  EXPECT_EQ(call({"simulate", "--epsilon", "1.5", "--x", "1", "--t", "1", "--out", out}), 2);
  EXPECT_FALSE(fs::exists(out));
  const auto e = json::parse(err_.str().substr(0, err_.str().find('\n')));
  EXPECT_EQ(e["exit_code"], 2);
}

TEST_F(CliTest, MissingRequiredField) {
  EXPECT_EQ(call({"simulate", "--epsilon", "0.5", "--x", "1", "--out", path("x.jsonl")}), 2);
  EXPECT_NE(err_.str().find("t"), std::string::npos);
}

TEST_F(CliTest, UnknownConfigKey) {
  const auto cfg = path("cfg.json");
  std::ofstream(cfg) << R"({"epsilon": 0.5, "x": 1, "t": 1, "colour": "red"})";
  EXPECT_EQ(call({"simulate", "--config", cfg, "--out", path("o.jsonl")}), 2);
  EXPECT_NE(err_.str().find("colour"), std::string::npos);
}

TEST_F(CliTest, MissingConfigFile) {
  EXPECT_EQ(call({"simulate", "--config", path("nope.json"), "--out", path("o.jsonl")}), 4);
}

TEST_F(CliTest, BadWorkerEnvironment) {
  setenv("SPINDLE_WORKERS", "0", 1);
  EXPECT_EQ(call({"simulate", "--epsilon", "0.5", "--x", "1", "--t", "1", "--reps", "1000", "--out", path("o.jsonl")}),
            2);
}

TEST_F(CliTest, SpineSummary) {
  const auto out = path("spine.jsonl");
  ASSERT_EQ(call({"spine", "--epsilon", "0.5", "--x", "1", "--t", "3", "--reps", "2000", "--out", out}), 0)
      << err_.str();
  EXPECT_EQ(count_lines(slurp(out)), 2001u);
  const auto s = load(out + ".summary.json");
  EXPECT_GT(s["keps"]["estimate"].get<double>(), 0.0);
  EXPECT_GT(s["implied_conditional_population"]["estimate"].get<double>(), 1.0);
  EXPECT_FALSE(s.contains("conditioning"));
}

TEST_F(CliTest, SpineEndpointNote) {
  const auto out = path("spine.jsonl");
  ASSERT_EQ(call({"spine", "--epsilon", "0.5", "--x", "1", "--t", "3", "--reps", "1000", "--endpoint", "2",
                  "--out", out}),
            0);
  const auto s = load(out + ".summary.json");
  EXPECT_EQ(s["conditioning"], "conditioning: spine is a Bessel bridge to endpoint 2");
  EXPECT_EQ(call({"spine", "--epsilon", "0.5", "--x", "1", "--t", "3", "--reps", "999", "--out", out}), 2);
}

TEST_F(CliTest, VerifyOnlyTheta) {
  ASSERT_EQ(call({"verify", "--only", "theta"}), 0) << err_.str();
  const auto r = json::parse(out_.str());
  ASSERT_FALSE(r["checks"].empty());
  for (const auto& c : r["checks"]) {
    EXPECT_EQ(c["group"], "theta");
    EXPECT_EQ(c["verdict"], "pass");
  }
}

TEST_F(CliTest, VerifyInjectedFault) {
  const auto out = path("verify.json");
  EXPECT_EQ(call({"verify", "--only", "theta", "--inject-fault", "drop_theta_k2", "--out", out}), 5);
  const auto r = load(out);
  bool failed = false;
  for (const auto& c : r["checks"]) failed |= c["verdict"] == "fail";
  EXPECT_TRUE(failed);
}

TEST_F(CliTest, VerifyUnderpowered) {
  EXPECT_EQ(call({"verify", "--only", "excursion", "--reps", "100"}), 0);
  EXPECT_NE(err_.str().find("inconclusive"), std::string::npos);
  EXPECT_EQ(call({"verify", "--only", "bogus"}), 2);
}

TEST_F(CliTest, Sweep) {
  const auto out = path("sweep.csv");
  ASSERT_EQ(call({"sweep", "--horizons", "2", "--reps", "1000", "--out", out}), 0) << err_.str();
  const std::string csv = slurp(out);
  EXPECT_EQ(count_lines(csv), 4u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "epsilon,t,keps,keps_se,cond_pop_naive,cond_pop_naive_se,cond_pop_spine,reps,seed");
  const auto m = load(out + ".manifest.json");
  ASSERT_EQ(m["cells"].size(), 3u);
  for (const auto& c : m["cells"]) EXPECT_EQ(c["status"], "inconclusive");
}

TEST_F(CliTest, SweepWorkerIndependent) {
  const auto a = path("a.csv"), b = path("b.csv");
  ASSERT_EQ(call({"sweep", "--epsilons", "0.5", "--horizons", "2", "--reps", "2000", "--out", a}), 0);
  setenv("SPINDLE_WORKERS", "4", 1);
  ASSERT_EQ(call({"sweep", "--epsilons", "0.5", "--horizons", "2", "--reps", "2000", "--out", b}), 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(CliTest, SweepAllCellsFail) {
  EXPECT_EQ(call({"sweep", "--epsilons", "0.5", "--horizons", "3", "--reps", "1000", "--max-particles", "3",
                  "--out", path("f.csv")}),
            3);
}

TEST_F(CliTest, NoSubcommand) { EXPECT_NE(call({}), 0); }
