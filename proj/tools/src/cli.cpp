#include "spindle_cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "spindle/errors.hpp"
#include "spindle/version.hpp"

namespace spindle::cli {

namespace {

void report_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  err << Json{{"error", kind}, {"exit_code", code}, {"message", message}}.dump() << '\n';
}

unsigned resolve_workers(unsigned from_flag) {
  const char* env = std::getenv("SPINDLE_WORKERS");
  if (env == nullptr || *env == '\0') return std::max(1u, from_flag);
  const Json parsed = parse_flag(Field{"SPINDLE_WORKERS", Kind::integer, false, nullptr, ""}, env);
  const auto n = parsed.get<std::uint64_t>();
  if (n == 0 || n > 4096) throw ConfigError("SPINDLE_WORKERS must be between 1 and 4096");
  return static_cast<unsigned>(n);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo toolkit for near-critical branching Brownian motion with absorption",
               "spindle"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  struct Bound {
    CLI::App* app;
    const CommandSchema* schema;
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> options;
    std::string config_path;
    std::string out_path;
    unsigned workers = 1;
  };
  std::vector<std::unique_ptr<Bound>> commands;
  for (const auto& schema : schemas()) {
    auto b = std::make_unique<Bound>();
    b->schema = &schema;
    b->app = app.add_subcommand(schema.name, schema.help);
    for (const auto& f : schema.fields) {
      auto* opt = b->app->add_option(f.flag(), b->raw[f.key], f.help);
      if (f.hidden) opt->group("");
      b->options[f.key] = opt;
    }
    b->app->add_option("--config", b->config_path,
                       "JSON config or manifest (JSON Lines output files work too)");
    b->app->add_option("--out", b->out_path, "output file");
    b->app->add_option("--workers", b->workers, "worker threads (SPINDLE_WORKERS overrides)")
        ->check(CLI::Range(1u, 4096u));
    commands.push_back(std::move(b));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "validation", kExitValidation, e.what());
    return kExitValidation;
  }

  Bound* chosen = nullptr;
  for (auto& b : commands) {
    if (b->app->parsed()) chosen = b.get();
  }
  const std::string& name = chosen->schema->name;

  try {
    std::map<std::string, std::string> flags;
    for (const auto& [key, opt] : chosen->options) {
      if (opt->count() > 0) flags[key] = chosen->raw[key];
    }
    Json from_file;
    if (!chosen->config_path.empty()) from_file = load_config_file(chosen->config_path, name);
    const Json config = resolve_config(*chosen->schema, from_file, flags);

    RunContext ctx{std::nullopt, resolve_workers(chosen->workers), out, err};
    if (!chosen->out_path.empty()) ctx.out_path = chosen->out_path;

    if (name == "simulate") return cmd_simulate(config, ctx);
    if (name == "spine") return cmd_spine(config, ctx);
    if (name == "verify") return cmd_verify(config, ctx);
    return cmd_sweep(config, ctx);
  } catch (const ConfigError& e) {
    report_error(err, "validation", kExitValidation, e.what());
    return kExitValidation;
  } catch (const ParameterError& e) {
    report_error(err, "validation", kExitValidation, e.what());
    return kExitValidation;
  } catch (const RegistryError& e) {
    report_error(err, "validation", kExitValidation, e.what());
    return kExitValidation;
  } catch (const IoError& e) {
    report_error(err, "io", kExitIo, e.what());
    return kExitIo;
  } catch (const SimulationError& e) {
    const char* kind = dynamic_cast<const ExplosionError*>(&e) ? "explosion" : "budget";
    err << Json{{"error", "simulation"},
                {"kind", kind},
                {"exit_code", kExitSimulation},
                {"message", e.what()},
                {"time_reached", e.time_reached()}}
               .dump()
        << '\n';
    return kExitSimulation;
  } catch (const DegenerateEstimateError& e) {
    report_error(err, "simulation", kExitSimulation, e.what());
    return kExitSimulation;
  }
}

}  // namespace spindle::cli
