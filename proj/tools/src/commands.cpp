#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "spindle/battery.hpp"
#include "spindle/bbm.hpp"
#include "spindle/errors.hpp"
#include "spindle/estimators.hpp"
#include "spindle/spine.hpp"
#include "spindle/sweep.hpp"
#include "spindle_cli/cli.hpp"

namespace spindle::cli {

namespace {

Json to_json(const Manifest& m) {
  Json j = Json::object();
  j["master_seed"] = m.master_seed;
  j["epsilon"] = m.epsilon;
  j["x"] = m.x;
  j["horizon"] = m.horizon;
  j["notes"] = m.notes;
  return j;
}

Json to_json(const EstimateReport& r) {
  Json j = Json::object();
  j["estimate"] = r.estimate;
  j["std_error"] = r.std_error;
  j["reps"] = r.reps;
  j["ci_level"] = r.ci_level;
  j["half_width"] = r.half_width;
  j["ci"] = Json::array({r.ci().lower, r.ci().upper});
  j["manifest"] = to_json(r.manifest);
  return j;
}

Json to_json(const std::optional<EstimateReport>& r) { return r ? to_json(*r) : Json(nullptr); }

// Finite doubles only; JSON has no infinities.
Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

const std::string& require_out(const RunContext& ctx, const std::string& command) {
  if (!ctx.out_path || ctx.out_path->empty()) {
    throw ConfigError("'" + command + "' requires --out");
  }
  return *ctx.out_path;
}

class OutputFile {
 public:
  explicit OutputFile(const std::string& path) : path_(path), stream_(path, std::ios::binary) {
    if (!stream_) throw IoError("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return stream_; }
  void close() {
    stream_.close();
    if (!stream_) throw IoError("failed writing '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream stream_;
};

void write_json_file(const std::string& path, const Json& doc) {
  OutputFile f(path);
  f.stream() << doc.dump(2) << '\n';
  f.close();
}

struct ModelRun {
  ModelParams params;
  InitialCondition init;
  Horizon horizon;
  std::size_t reps;
  std::uint64_t seed;
  double ci_level;
  SimLimits limits;
};

void check_ci_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("ci_level must lie in (0, 1)");
}

ModelRun model_run(const Json& c) {
  ModelRun r{make_params(c.at("epsilon").get<double>()),
             make_initial(c.at("x").get<double>()),
             make_horizon(c.at("t").get<double>()),
             c.at("reps").get<std::size_t>(),
             c.at("seed").get<std::uint64_t>(),
             c.at("ci_level").get<double>(),
             {c.at("max_particles").get<std::size_t>(), c.at("max_events").get<std::size_t>()}};
  check_ci_level(r.ci_level);
  validate_limits(r.limits);
  return r;
}

Manifest report_manifest(const ModelRun& r, std::string note) {
  return Manifest{r.seed, r.params.epsilon, r.init.x, r.horizon.t, {std::move(note)}};
}

}  // namespace

int cmd_simulate(const Json& config, const RunContext& ctx) {
  const ModelRun run = model_run(config);
  if (run.reps < 2) throw ParameterError("simulate requires reps >= 2");
  const std::string& path = require_out(ctx, "simulate");
  const Json manifest = make_manifest("simulate", config);

  const auto reps = simulate_replicates(run.params, run.init, run.horizon, run.limits,
                                        StreamFamily{run.seed}, run.reps, ctx.workers);

  OutputFile records(path);
  records.stream() << Json{{"type", "manifest"}, {"manifest", manifest}}.dump() << '\n';
  for (const auto& r : reps) {
    Json rec = Json::object();
    rec["type"] = "replicate";
    rec["stream_id"] = r.stream_id;
    rec["alive"] = r.alive;
    rec["log_v_core"] = finite_or_null(r.log_v_core);
    rec["branch_events"] = r.branch_events;
    rec["max_population"] = r.max_population;
    records.stream() << rec.dump() << '\n';
  }
  records.close();

  std::size_t survivors = 0;
  stats::RunningMoments count, ratio;
  const double log_v0 = std::log(run.init.x) + run.params.rho * run.init.x;
  for (const auto& r : reps) {
    survivors += r.alive > 0;
    count.push(static_cast<double>(r.alive));
    ratio.push(r.alive == 0 ? 0.0
                            : std::exp(r.log_v_core + run.params.epsilon * run.horizon.t - log_v0));
  }
  Json summary = Json::object();
  summary["manifest"] = manifest;
  summary["survival_probability"] =
      to_json(bernoulli_report(survivors, run.reps, run.ci_level,
                               report_manifest(run, "estimator: naive survival frequency")));
  summary["mean_population"] =
      to_json(make_report(count.mean(), count.std_error(), run.reps, run.ci_level,
                          report_manifest(run, "estimator: mean N_t")));
  summary["martingale_ratio"] =
      to_json(make_report(ratio.mean(), ratio.std_error(), run.reps, run.ci_level,
                          report_manifest(run, "estimator: mean V(t) / V(0), expected 1")));
  try {
    summary["conditional_population"] = to_json(
        conditional_population_from(reps, run.ci_level,
                                    report_manifest(run, "estimator: naive ratio"))
            .ratio);
  } catch (const DegenerateEstimateError& e) {
    summary["conditional_population"] = nullptr;
    summary["conditional_population_note"] = e.what();
  }
  write_json_file(path + ".summary.json", summary);
  return kExitOk;
}

int cmd_spine(const Json& config, const RunContext& ctx) {
  const ModelRun run = model_run(config);
  if (run.reps < 1000) throw ParameterError("spine requires reps >= 1000");
  std::optional<double> endpoint;
  if (!config.at("endpoint").is_null()) {
    endpoint = config.at("endpoint").get<double>();
    if (!(*endpoint > 0.0)) throw ParameterError("endpoint must be > 0");
  }
  const std::string& path = require_out(ctx, "spine");
  const Json manifest = make_manifest("spine", config);

  const auto reps = simulate_q_replicates(run.params, run.init, run.horizon, run.limits,
                                          StreamFamily{run.seed}, run.reps, ctx.workers, endpoint);

  OutputFile records(path);
  records.stream() << Json{{"type", "manifest"}, {"manifest", manifest}}.dump() << '\n';
  for (const auto& r : reps) {
    Json rec = Json::object();
    rec["type"] = "replicate";
    rec["stream_id"] = r.stream_id;
    rec["branch_count"] = r.branch_count;
    rec["spine_terminal"] = r.spine_terminal;
    rec["log_v_core"] = finite_or_null(r.log_v_core);
    rec["alive"] = r.alive;
    records.stream() << rec.dump() << '\n';
  }
  records.close();

  Manifest m = report_manifest(run, "estimator: spine");
  if (endpoint) {
    std::ostringstream note;
    note.precision(17);
    note << "conditioning: spine is a Bessel bridge to endpoint " << *endpoint;
    m.notes.push_back(note.str());
  }
  Json summary = Json::object();
  summary["manifest"] = manifest;
  if (endpoint) summary["conditioning"] = m.notes.back();
  if (run.horizon.t > 0.0) {
    const EstimateReport keps = keps_from(reps, run.horizon.t, run.ci_level, m);
    summary["keps"] = to_json(keps);
    summary["implied_survival"] = to_json(implied_survival(keps, run.params, run.init, run.horizon));
    summary["implied_conditional_population"] =
        to_json(implied_conditional_population(keps, run.params));
  } else {
    summary["keps"] = nullptr;
    summary["keps_note"] = "K is undefined at t = 0";
  }
  write_json_file(path + ".summary.json", summary);
  return kExitOk;
}

int cmd_verify(const Json& config, const RunContext& ctx) {
  BatteryOptions options;
  options.seed = config.at("seed").get<std::uint64_t>();
  if (!config.at("reps").is_null()) options.reps = config.at("reps").get<std::size_t>();
  options.only = config.at("only").get<std::vector<std::string>>();
  const auto fault = config.at("inject_fault").get<std::string>();
  if (fault == "drop_theta_k2") {
    options.fault = BatteryFault::drop_theta_k2;
  } else if (fault != "none") {
    throw ParameterError("unknown fault '" + fault + "'");
  }
  options.workers = ctx.workers;
  const auto groups = battery_groups();
  for (const auto& g : options.only) {
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) {
      throw ParameterError("unknown check group '" + g + "'");
    }
  }

  const auto results = lemma_battery(options);
  Json checks = Json::array();
  std::vector<std::string> failed, inconclusive;
  for (const auto& r : results) {
    Json j = Json::object();
    j["check_name"] = r.name;
    j["group"] = r.group;
    j["verdict"] = to_string(r.verdict);
    j["statistic"] = finite_or_null(r.statistic);
    j["threshold"] = r.threshold;
    j["detail"] = r.detail;
    checks.push_back(j);
    if (r.verdict == Verdict::fail) failed.push_back(r.name);
    if (r.verdict == Verdict::inconclusive) inconclusive.push_back(r.name);
  }
  const Json report{{"manifest", make_manifest("verify", config)}, {"checks", checks}};
  if (ctx.out_path && !ctx.out_path->empty()) {
    write_json_file(*ctx.out_path, report);
  } else {
    ctx.out << report.dump(2) << '\n';
  }
  if (!inconclusive.empty()) {
    ctx.err << Json{{"warning", "inconclusive"}, {"checks", inconclusive}}.dump() << '\n';
  }
  if (!failed.empty()) {
    ctx.err << Json{{"error", "verification"}, {"exit_code", kExitVerification}, {"checks", failed}}
                   .dump()
            << '\n';
    return kExitVerification;
  }
  return kExitOk;
}

int cmd_sweep(const Json& config, const RunContext& ctx) {
  SweepGrid grid{config.at("epsilons").get<std::vector<double>>(),
                 config.at("horizons").get<std::vector<double>>(),
                 config.at("reps").get<std::size_t>()};
  validate_sweep_grid(grid);
  const InitialCondition init = make_initial(config.at("x").get<double>());
  const auto seed = config.at("seed").get<std::uint64_t>();
  const double ci_level = config.at("ci_level").get<double>();
  check_ci_level(ci_level);
  const SimLimits limits{config.at("max_particles").get<std::size_t>(),
                         config.at("max_events").get<std::size_t>()};
  validate_limits(limits);
  const std::string& path = require_out(ctx, "sweep");

  const auto rows = yaglom_sweep(grid, init, limits, seed, ctx.workers, ci_level);

  OutputFile csv(path);
  write_sweep_csv(csv.stream(), rows);
  csv.close();

  Json cells = Json::array();
  std::size_t failures = 0;
  for (const auto& r : rows) {
    Json c = Json::object();
    c["epsilon"] = r.epsilon;
    c["t"] = r.t;
    c["reps"] = r.reps;
    c["seed"] = r.seed;
    c["status"] = to_string(r.status);
    if (!r.error.empty()) c["error"] = r.error;
    c["log_cond_pop_naive"] = finite_or_null(r.log_cond_pop_naive());
    c["log_cond_pop_spine"] = finite_or_null(r.log_cond_pop_spine());
    c["keps"] = to_json(r.keps);
    c["cond_pop_naive"] = to_json(r.cond_pop_naive);
    c["cond_pop_spine"] = to_json(r.cond_pop_spine);
    c["survival_naive"] = to_json(r.survival_naive);
    cells.push_back(c);
    failures += r.status == CellStatus::failed;
  }
  write_json_file(path + ".manifest.json",
                  Json{{"manifest", make_manifest("sweep", config)}, {"cells", cells}});
  if (failures == rows.size()) {
    ctx.err << Json{{"error", "simulation"}, {"exit_code", kExitSimulation},
                    {"message", "every sweep cell failed"}}
                   .dump()
            << '\n';
    return kExitSimulation;
  }
  return kExitOk;
}

}  // namespace spindle::cli
