#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace jumpsde::cli {

using json = nlohmann::json;

/// Bad config text, unknown key, or a value of the wrong type. Maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> experiment_names();

/// Complete config for `experiment` with every key at its default.
json default_config(std::string_view experiment);

/// Parses a JSON document; errors carry `source` and the line/column.
json parse_config_text(std::string_view text, const std::string& source);

/// Overlays `user` onto `base`. Keys absent from `base` and type changes are rejected,
/// except inside free-form maps (scenario.params).
json merge_config(const json& base, const json& user);

/// Applies "dotted.key=value"; value is read as JSON when it parses, else as a string.
void apply_override(json& cfg, std::string_view assignment);

/// A validated experiment configuration. to_json() followed by from_json() is lossless.
class ExperimentConfig {
 public:
  static ExperimentConfig defaults(std::string_view experiment);
  static ExperimentConfig from_json(const json& doc);

  const json& to_json() const noexcept { return doc_; }
  const std::string& experiment() const noexcept { return experiment_; }

  std::string scenario() const { return doc_.at("scenario").at("name").get<std::string>(); }
  std::uint64_t seed() const { return doc_.at("seeds").at("base").get<std::uint64_t>(); }
  std::string out() const { return doc_.at("out").get<std::string>(); }

  /// Value at a dotted path, e.g. "grid.n_steps".
  const json& at(std::string_view dotted) const;
  template <class T>
  T get(std::string_view dotted) const {
    try {
      return at(dotted).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + std::string(dotted) + "' has the wrong type");
    }
  }

  void set(std::string_view assignment);

 private:
  ExperimentConfig(std::string experiment, json doc);
  void validate() const;

  std::string experiment_;
  json doc_;
};

}  // namespace jumpsde::cli
