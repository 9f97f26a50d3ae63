#include "cli/config.hpp"

#include <algorithm>

namespace jumpsde::cli {

namespace {

json base(std::string scenario, json x0, double t_end, std::uint64_t n_steps, std::uint64_t n_paths) {
  return {
      {"scenario", {{"name", std::move(scenario)}, {"params", json::object()}}},
      {"grid", {{"t0", 0.0}, {"T", t_end}, {"n_steps", n_steps}}},
      {"seeds", {{"base", 1}, {"n_paths", n_paths}}},
      {"x0", std::move(x0)},
      {"out", "jumpsde-out"},
  };
}

json make_defaults(std::string_view experiment) {
  if (experiment == "simulate") {
    json c = base("rot2d", {1.0, 0.0}, 1.0, 1024, 1);
    c["simulate"] = {{"jacobian", true}};
    return c;
  }
  if (experiment == "check-ito") {
    json c = base("brownian1d", {1.0}, 1.0, 64, 1000);
    c["ito"] = {{"function", "x1-squared"}, {"levels", 4},          {"mode", "slope"},
                {"slope_min", 0.4},         {"slope_max", 1.1},     {"exact_tolerance", 1e-12}};
    return c;
  }
  if (experiment == "check-ito-wentzel") {
    json c = base("rot2d", {1.0, 0.0}, 1.0, 64, 500);
    c["ito_wentzel"] = {{"field", "rot2d-mixed"}, {"levels", 4}, {"mode", "consistency"},
                        {"slope_min", 0.4},       {"reduction_tolerance", 1e-12}};
    return c;
  }
  if (experiment == "kernel") {
    json c = base("ou1d", {1.0}, 0.5, 1000, 1);
    c["scenario"]["params"] = {{"sigma", 0.0}, {"rate", 0.0}};
    c["kernel"] = {{"mean", 0.0},
                   {"sd", 1.0},
                   {"ratio_mean", 0.5},
                   {"ratio_sd", 1.2},
                   {"x_min", -6.0},
                   {"x_max", 6.0},
                   {"nodes", 801},
                   {"cells", 400},
                   {"starts", {-1.0, 0.0, 0.5, 1.0}},
                   {"snapshot_stride", 100},
                   {"quadrature_tolerance", 1e-6},
                   {"identity_tolerance", 1e-12},
                   {"mass_tolerance", 1e-3},
                   {"characteristic_tolerance", 1e-3},
                   {"ratio_tolerance", 5e-2},
                   {"negativity_tolerance", 1e-6}};
    return c;
  }
  if (experiment == "first-integral") {
    json c = base("rot2d", {1.0, 0.0}, 1.0, 128, 500);
    c["first_integral"] = {{"candidate", "radius2"},
                           {"lattice", 21},
                           {"times", {0.0}},
                           {"tolerance", 1e-9},
                           {"preimage_tolerance", 1e-10},
                           {"derivative_tolerance", 1e-5},
                           {"levels", 3},
                           {"slope_min", 0.4},
                           {"slope_max", 1.3}};
    return c;
  }
  if (experiment == "convergence") {
    json c = base("ou1d", {1.0}, 1.0, 64, 200);
    c["convergence"] = {{"levels", 4}, {"reference_refine", 32}, {"slope_min", 0.7}, {"slope_max", 1.3}};
    return c;
  }
  if (experiment == "validate") {
    json c = base("rot2d", {1.0, 0.0}, 1.0, 64, 1);
    c["validate"] = {{"per_axis", 5}, {"delta", 1e-5}, {"tolerance", 1e-6}, {"inset", 0.0}};
    return c;
  }
  std::string names;
  for (const auto& n : experiment_names()) names += " " + n;
  throw ConfigError("unknown experiment '" + std::string(experiment) + "'; available:" + names);
}

bool free_form(const std::string& path) { return path == "scenario.params"; }

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    return !(a.is_number_unsigned() || a.is_number_integer()) || b.is_number_integer() || b.is_number_unsigned();
  }
  return a.type() == b.type();
}

void merge_into(json& dst, const json& src, const std::string& path) {
  if (!src.is_object()) throw ConfigError("config key '" + path + "' must be an object");
  for (const auto& [key, value] : src.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (free_form(path)) {
      if (!value.is_number()) throw ConfigError("config key '" + here + "' must be a number");
      dst[key] = value;
      continue;
    }
    if (!dst.contains(key)) throw ConfigError("unknown config key '" + here + "'");
    json& target = dst[key];
    if (target.is_object()) {
      merge_into(target, value, here);
    } else if (!same_kind(target, value)) {
      throw ConfigError("config key '" + here + "' expects a " + std::string(target.type_name()) + ", got " +
                        std::string(value.type_name()));
    } else if (target.is_array()) {
      for (const auto& e : value) {
        if (!e.is_number()) throw ConfigError("config key '" + here + "' expects an array of numbers");
      }
      target = value;
    } else {
      target = value;
    }
  }
}

}  // namespace

std::vector<std::string> experiment_names() {
  return {"check-ito", "check-ito-wentzel", "convergence", "first-integral", "kernel", "simulate", "validate"};
}

json default_config(std::string_view experiment) {
  json c = make_defaults(experiment);
  c["experiment"] = std::string(experiment);
  return c;
}

json parse_config_text(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + e.what());
  }
}

json merge_config(const json& base, const json& user) {
  json out = base;
  merge_into(out, user, "");
  return out;
}

void apply_override(json& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json patch = value;
  std::string rest = key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1)) {
    parts.push_back(rest.substr(0, pos));
  }
  parts.push_back(rest);
  if (std::any_of(parts.begin(), parts.end(), [](const std::string& p) { return p.empty(); })) {
    throw ConfigError("override key '" + key + "' has an empty component");
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  cfg = merge_config(cfg, patch);
}

ExperimentConfig::ExperimentConfig(std::string experiment, json doc)
    : experiment_(std::move(experiment)), doc_(std::move(doc)) {
  validate();
}

ExperimentConfig ExperimentConfig::defaults(std::string_view experiment) {
  return ExperimentConfig(std::string(experiment), default_config(experiment));
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("experiment") || !doc["experiment"].is_string()) {
    throw ConfigError("config needs a string 'experiment' key");
  }
  const auto name = doc["experiment"].get<std::string>();
  json merged = merge_config(default_config(name), doc);
  if (merged["experiment"] != name) throw ConfigError("config key 'experiment' cannot change");
  return ExperimentConfig(name, std::move(merged));
}

const json& ExperimentConfig::at(std::string_view dotted) const {
  const json* node = &doc_;
  std::string_view rest = dotted;
  while (true) {
    const auto dot = rest.find('.');
    const std::string key(rest.substr(0, dot));
    if (!node->is_object() || !node->contains(key)) {
      throw ConfigError("missing config key '" + std::string(dotted) + "'");
    }
    node = &(*node)[key];
    if (dot == std::string_view::npos) return *node;
    rest = rest.substr(dot + 1);
  }
}

void ExperimentConfig::set(std::string_view assignment) {
  json next = doc_;
  apply_override(next, assignment);
  if (next["experiment"] != experiment_) throw ConfigError("config key 'experiment' cannot change");
  ExperimentConfig checked(experiment_, std::move(next));
  doc_ = std::move(checked.doc_);
}

void ExperimentConfig::validate() const {
  const auto n_steps = get<std::int64_t>("grid.n_steps");
  if (n_steps <= 0) throw ConfigError("config key 'grid.n_steps' must be positive");
  if (!(get<double>("grid.T") > get<double>("grid.t0"))) throw ConfigError("config needs grid.T > grid.t0");
  if (get<std::int64_t>("seeds.n_paths") <= 0) throw ConfigError("config key 'seeds.n_paths' must be positive");
  if (get<std::int64_t>("seeds.base") < 0) throw ConfigError("config key 'seeds.base' must be non-negative");
  if (out().empty()) throw ConfigError("config key 'out' must not be empty");
}

}  // namespace jumpsde::cli
