#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "spindle/version.hpp"

namespace spindle::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 20'240'917;

std::vector<Field> model_fields() {
  return {
      {"epsilon", Kind::number, true, nullptr, "criticality gap epsilon in (0, 1)"},
      {"x", Kind::number, true, nullptr, "initial position (> 0)"},
      {"t", Kind::number, true, nullptr, "horizon (>= 0)"},
      {"reps", Kind::integer, false, 10'000, "number of replicates"},
      {"seed", Kind::integer, false, kDefaultSeed, "master seed"},
      {"ci_level", Kind::number, false, 0.95, "confidence level of reported intervals"},
      {"max_particles", Kind::integer, false, 1'000'000, "population cap per tree"},
      {"max_events", Kind::integer, false, 100'000'000, "event budget per tree"},
  };
}

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::number: return "number";
    case Kind::integer: return "non-negative integer";
    case Kind::string: return "string";
    case Kind::number_list: return "list of numbers";
    case Kind::string_list: return "list of strings";
  }
  return "value";
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_integer(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

void check_type(const Field& f, const Json& v) {
  bool ok = false;
  switch (f.kind) {
    case Kind::number: ok = v.is_number(); break;
    case Kind::integer: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); break;
    case Kind::string: ok = v.is_string(); break;
    case Kind::number_list:
      ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); });
      break;
    case Kind::string_list:
      ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_string(); });
      break;
  }
  if (v.is_null() && !f.required && f.fallback.is_null()) ok = true;
  if (!ok) throw ConfigError("'" + f.key + "' must be a " + kind_name(f.kind));
}

}  // namespace

std::string Field::flag() const {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

const Field* CommandSchema::find(const std::string& key) const {
  for (const auto& f : fields) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

const std::vector<CommandSchema>& schemas() {
  static const std::vector<CommandSchema> all = [] {
    std::vector<CommandSchema> s;
    s.push_back({"simulate", "run absorbed branching Brownian motion replicates", model_fields()});

    auto spine = model_fields();
    spine.push_back({"endpoint", Kind::number, false, nullptr,
                     "condition the spine to end at this position (> 0)"});
    s.push_back({"spine", "run size-biased (spine) replicates and estimate K", spine});

    s.push_back({"verify",
                 "run the verification battery",
                 {{"seed", Kind::integer, false, kDefaultSeed, "master seed"},
                  {"reps", Kind::integer, false, nullptr, "override replicates of statistical checks"},
                  {"only", Kind::string_list, false, Json::array(), "comma-separated check groups"},
                  {"inject_fault", Kind::string, false, "none", "", true}}});

    s.push_back({"sweep",
                 "estimate K and the conditional population over an (epsilon, t) grid",
                 {{"epsilons", Kind::number_list, false, Json::array({0.6, 0.4, 0.25}), "comma-separated epsilons"},
                  {"horizons", Kind::number_list, false, Json::array({6.0}), "comma-separated horizons"},
                  {"reps", Kind::integer, false, 100'000, "replicates per cell and estimator"},
                  {"x", Kind::number, false, 1.0, "initial position"},
                  {"seed", Kind::integer, false, kDefaultSeed, "master seed"},
                  {"ci_level", Kind::number, false, 0.95, "confidence level"},
                  {"max_particles", Kind::integer, false, 1'000'000, "population cap per tree"},
                  {"max_events", Kind::integer, false, 100'000'000, "event budget per tree"}}});
    return s;
  }();
  return all;
}

const CommandSchema& schema_for(const std::string& command) {
  for (const auto& s : schemas()) {
    if (s.name == command) return s;
  }
  throw ConfigError("unknown command '" + command + "'");
}

Json parse_flag(const Field& field, const std::string& text) {
  switch (field.kind) {
    case Kind::number: return parse_number(field.key, text);
    case Kind::integer: return parse_integer(field.key, text);
    case Kind::string: return text;
    case Kind::number_list: {
      Json out = Json::array();
      for (const auto& p : split(text)) out.push_back(parse_number(field.key, p));
      return out;
    }
    case Kind::string_list: {
      Json out = Json::array();
      for (const auto& p : split(text)) out.push_back(p);
      return out;
    }
  }
  return nullptr;
}

Json load_config_file(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::string first;
  std::getline(in, first);
  std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Json doc;
  try {
    doc = Json::parse(first + "\n" + rest);
  } catch (const Json::parse_error&) {
    // JSON Lines: only the first line is the manifest.
    try {
      doc = Json::parse(first);
    } catch (const Json::parse_error& e) {
      throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
  }
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  if (doc.contains("manifest") && doc["manifest"].is_object()) doc = doc["manifest"];
  if (doc.contains("config") && doc.contains("command")) {
    if (doc["command"] != command) {
      throw ConfigError("manifest was written by '" + doc["command"].get<std::string>() +
                        "', not '" + command + "'");
    }
    return doc["config"];
  }
  return doc;
}

Json resolve_config(const CommandSchema& schema, const Json& from_file,
                    const std::map<std::string, std::string>& flags) {
  if (!from_file.is_null() && !from_file.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  if (from_file.is_object()) {
    for (const auto& [key, value] : from_file.items()) {
      if (!schema.find(key)) {
        throw ConfigError("unknown config key '" + key + "' for command '" + schema.name + "'");
      }
    }
  }
  Json config = Json::object();
  for (const auto& f : schema.fields) {
    Json value = f.fallback;
    bool given = false;
    if (from_file.is_object() && from_file.contains(f.key)) {
      value = from_file.at(f.key);
      given = !value.is_null();
    }
    if (const auto it = flags.find(f.key); it != flags.end()) {
      value = parse_flag(f, it->second);
      given = true;
    }
    if (f.required && !given) throw ConfigError("missing required option " + f.flag());
    check_type(f, value);
    config[f.key] = value;
  }
  return config;
}

Json make_manifest(const std::string& command, const Json& config) {
  Json m = Json::object();
  m["tool"] = "spindle";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config;
  m["master_seed"] = config.at("seed");
  return m;
}

}  // namespace spindle::cli
