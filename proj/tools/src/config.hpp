#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace spindle::cli {

using Json = nlohmann::ordered_json;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { number, integer, string, number_list, string_list };

struct Field {
  std::string key;
  Kind kind;
  bool required = false;
  Json fallback;  // null: optional with no default
  std::string help;
  bool hidden = false;

  std::string flag() const;
};

struct CommandSchema {
  std::string name;
  std::string help;
  std::vector<Field> fields;

  const Field* find(const std::string& key) const;
};

const std::vector<CommandSchema>& schemas();
const CommandSchema& schema_for(const std::string& command);

/// Parses a flag's text into the field's JSON type.
Json parse_flag(const Field& field, const std::string& text);

/// Reads a config file for `command`: a plain object of schema keys, a
/// manifest object, or a JSON Lines file whose first line is a manifest.
Json load_config_file(const std::string& path, const std::string& command);

/// Config file values, then explicit flags, then defaults; every key is
/// type-checked, unknown keys and missing required keys are rejected. The
/// result lists every schema key in schema order.
Json resolve_config(const CommandSchema& schema, const Json& from_file,
                    const std::map<std::string, std::string>& flags);

/// {tool, version, command, config, master_seed}.
Json make_manifest(const std::string& command, const Json& config);

}  // namespace spindle::cli
