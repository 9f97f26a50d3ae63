#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cli/config.hpp"
#include "jumpsde/csv.hpp"

namespace jumpsde::cli {

struct Criterion {
  std::string name;
  double value = 0.0;
  json tolerance;  // upper bound, or [lo, hi] with null for an open end
  bool pass = false;
};

struct ExperimentResult {
  std::string experiment;
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<Criterion> criteria;
  std::vector<std::pair<std::string, CsvTable>> tables;  // file name -> table
  std::vector<std::string> warnings;

  bool pass() const;
  json summary() const;
};

Criterion upper_bound(std::string name, double value, double tol);
Criterion within(std::string name, double value, double lo, double hi);
Criterion at_least(std::string name, double value, double lo);

/// Runs the configured experiment in memory; nothing is written.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace jumpsde::cli
