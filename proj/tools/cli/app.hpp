#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cli/experiments.hpp"

namespace jumpsde::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

/// Writes the tables, summary.json and the effective config.json into cfg.out().
void write_artifacts(const ExperimentConfig& cfg, const ExperimentResult& result);

/// Entry point behind the `jumpsde` binary; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jumpsde::cli
