#include "cli/app.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "jumpsde/errors.hpp"

namespace jumpsde::cli {

namespace fs = std::filesystem;

void write_artifacts(const ExperimentConfig& cfg, const ExperimentResult& result) {
  const fs::path dir(cfg.out());
  fs::create_directories(dir);
  for (const auto& [name, table] : result.tables) table.write_file((dir / name).string());
  auto dump = [&](const std::string& name, const json& doc) {
    std::ofstream f(dir / name, std::ios::binary);
    f << doc.dump(2) << '\n';
    if (!f) throw Error("failed writing '" + (dir / name).string() + "'");
  };
  dump("summary.json", result.summary());
  dump("config.json", cfg.to_json());
}

namespace {

struct Flags {
  std::string config;
  std::int64_t seed = -1;
  std::string out;
  std::vector<std::string> sets;
};

ExperimentConfig build_config(const std::string& experiment, const Flags& flags) {
  ExperimentConfig cfg = ExperimentConfig::defaults(experiment);
  if (!flags.config.empty()) {
    std::ifstream f(flags.config, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file '" + flags.config + "'");
    std::stringstream text;
    text << f.rdbuf();
    json doc = parse_config_text(text.str(), flags.config);
    if (!doc.is_object()) throw ConfigError(flags.config + ": config must be a JSON object");
    if (!doc.contains("experiment")) doc["experiment"] = experiment;
    if (doc["experiment"] != experiment) {
      throw ConfigError(flags.config + ": config is for experiment " + doc["experiment"].dump() + ", not '" +
                        experiment + "'");
    }
    try {
      cfg = ExperimentConfig::from_json(doc);
    } catch (const ConfigError& e) {
      throw ConfigError(flags.config + ": " + e.what());
    }
  }
  if (flags.seed >= 0) cfg.set("seeds.base=" + std::to_string(flags.seed));
  if (!flags.out.empty()) cfg.set("out=" + json(flags.out).dump());
  for (const auto& s : flags.sets) cfg.set(s);
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Jump-diffusion stochastic calculus laboratory", "jumpsde"};
  app.require_subcommand(1);
  Flags flags;
  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", flags.config, "JSON experiment config");
    sub->add_option("--seed", flags.seed, "base seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--set", flags.sets, "override a config key: dotted.key=value")->take_all();
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "jumpsde: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  try {
    const ExperimentConfig cfg = build_config(experiment, flags);
    const ExperimentResult result = run_experiment(cfg);
    write_artifacts(cfg, result);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
    for (const auto& c : result.criteria) {
      out << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << format_double(c.value) << " (tolerance "
          << c.tolerance.dump() << ")\n";
    }
    if (!result.pass()) {
      for (const auto& c : result.criteria) {
        if (!c.pass) err << "criterion failed: " << c.name << '\n';
      }
      return kExitFail;
    }
    return kExitPass;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace jumpsde::cli
