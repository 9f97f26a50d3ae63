#include "cli/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jumpsde/errors.hpp"
#include "jumpsde/integral.hpp"
#include "jumpsde/kernel.hpp"
#include "jumpsde/parallel.hpp"

namespace jumpsde::cli {

bool ExperimentResult::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

json ExperimentResult::summary() const {
  json list = json::array();
  for (const auto& c : criteria) {
    list.push_back({{"name", c.name},
                    {"value", std::isfinite(c.value) ? json(c.value) : json(format_double(c.value))},
                    {"tolerance", c.tolerance},
                    {"pass", c.pass}});
  }
  json out = {{"experiment", experiment}, {"scenario", scenario}, {"seed", seed}, {"criteria", std::move(list)}};
  if (!warnings.empty()) out["warnings"] = warnings;
  return out;
}

Criterion upper_bound(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value <= tol};
}

Criterion within(std::string name, double value, double lo, double hi) {
  return {std::move(name), value, json::array({lo, hi}), value >= lo && value <= hi};
}

Criterion at_least(std::string name, double value, double lo) {
  return {std::move(name), value, json::array({lo, nullptr}), value >= lo};
}

namespace {

struct Setup {
  Scenario scenario;
  Vector x0;
  TimeGrid grid;
  std::size_t n_paths;
  std::uint64_t seed;
};

std::size_t count(const ExperimentConfig& cfg, std::string_view key, std::size_t min = 1) {
  const auto v = cfg.get<std::int64_t>(key);
  if (v < static_cast<std::int64_t>(min)) {
    throw ConfigError("config key '" + std::string(key) + "' must be at least " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

Setup setup(const ExperimentConfig& cfg) {
  ScenarioParams params;
  for (const auto& [k, v] : cfg.at("scenario.params").items()) params[k] = v.get<double>();
  Scenario s = get_scenario(cfg.scenario(), params);
  const auto& x = cfg.at("x0");
  if (x.size() != s.dim()) {
    throw ConfigError("config key 'x0' has " + std::to_string(x.size()) + " entries; scenario '" + s.name +
                      "' has dimension " + std::to_string(s.dim()));
  }
  Vector x0(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) x0[static_cast<Eigen::Index>(i)] = x[i].get<double>();
  TimeGrid grid = build_grid(cfg.get<double>("grid.t0"), cfg.get<double>("grid.T"), count(cfg, "grid.n_steps"));
  return {std::move(s), std::move(x0), grid, count(cfg, "seeds.n_paths"), cfg.seed()};
}

NoiseRealization path_noise(const Setup& st, const TimeGrid& grid, std::size_t i) {
  return sample_noise(grid, st.scenario.wiener_dim(), st.scenario.marks, st.seed + i);
}

std::vector<double> steps_of(const TimeGrid& coarse, std::size_t levels) {
  std::vector<double> h;
  double step = coarse.step();
  for (std::size_t l = 0; l < levels; ++l, step /= 2.0) h.push_back(step);
  return h;
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Per-path, per-level scalar errors from coupled refinement levels, reduced to RMS per level.
template <class Fn>
std::vector<double> level_rms(const Setup& st, std::size_t levels, Fn&& error_at) {
  std::vector<std::vector<double>> err(levels, std::vector<double>(st.n_paths));
  parallel_for(st.n_paths, [&](std::size_t i) {
    const auto chain = refine_chain(path_noise(st, st.grid, i), levels);
    for (std::size_t l = 0; l < levels; ++l) err[l][i] = error_at(chain[l]);
  });
  std::vector<double> out;
  for (const auto& e : err) out.push_back(rms(e));
  return out;
}

CsvTable level_table(const std::vector<double>& h, const std::vector<double>& value, const std::string& column) {
  CsvTable t;
  t.header = {"level", "h", column};
  for (std::size_t l = 0; l < h.size(); ++l) t.add_row({std::to_string(l), format_double(h[l]), format_double(value[l])});
  return t;
}

void add_slope(ExperimentResult& r, const std::string& name, const std::vector<double>& h, const std::vector<double>& err,
               double lo, double hi) {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  try {
    const auto fit = fit_log2_slope(h, err);
    slope = fit.slope;
    residual = fit.residual;
  } catch (const InvalidArgument& e) {
    r.warnings.push_back(std::string("slope fit skipped: ") + e.what());
  }
  r.criteria.push_back(std::isfinite(hi) ? within(name, slope, lo, hi) : at_least(name, slope, lo));
  r.criteria.push_back({name + "_fit_residual", residual, nullptr, true});
}

ExperimentResult simulate(const ExperimentConfig& cfg, const Setup& st) {
  ExperimentResult r;
  const bool with_jacobian = cfg.get<bool>("simulate.jacobian");
  std::vector<Path> paths(st.n_paths, Path{st.grid, {}, {}});
  std::vector<JacobianState> jacs(st.n_paths, JacobianState{st.grid, {}, {}, {}});
  std::vector<int> diverged(st.n_paths, 0);
  parallel_for(st.n_paths, [&](std::size_t i) {
    const auto noise = path_noise(st, st.grid, i);
    try {
      if (with_jacobian) {
        auto run = simulate_jacobian(st.scenario, st.x0, noise);
        paths[i] = std::move(run.path);
        jacs[i] = std::move(run.jacobian);
      } else {
        paths[i] = simulate_path(st.scenario, st.x0, noise);
      }
    } catch (const DivergedPath&) {
      diverged[i] = 1;
    }
  });
  std::size_t n_diverged = 0;
  for (std::size_t i = 0; i < st.n_paths; ++i) {
    if (diverged[i]) {
      ++n_diverged;
      continue;
    }
    const std::string tag = "_" + std::to_string(i) + ".csv";
    r.tables.emplace_back("path" + tag, path_table(paths[i]));
    r.tables.emplace_back("events" + tag, events_table(paths[i]));
    if (with_jacobian) r.tables.emplace_back("jacobian" + tag, jacobian_table(jacs[i]));
  }
  r.criteria.push_back(upper_bound("diverged_paths", static_cast<double>(n_diverged), 0.0));
  return r;
}

ExperimentResult check_ito(const ExperimentConfig& cfg, const Setup& st) {
  ExperimentResult r;
  const auto f = get_candidate(cfg.get<std::string>("ito.function"), st.scenario.dim()).u;
  const auto mode = cfg.get<std::string>("ito.mode");
  const std::size_t levels = count(cfg, "ito.levels");
  const auto h = steps_of(st.grid, levels);
  auto discrepancy = [&](const NoiseRealization& noise) {
    const auto s = ito_series(f, st.scenario, simulate_path(st.scenario, st.x0, noise), noise);
    return s.cumulative.back() - s.direct_change;
  };
  const auto err = level_rms(st, levels, discrepancy);
  r.tables.emplace_back("ito_levels.csv", level_table(h, err, "rms_discrepancy"));
  {
    const auto noise = path_noise(st, st.grid, 0);
    r.tables.emplace_back("ito_series_0.csv", series_table(ito_series(f, st.scenario, simulate_path(st.scenario, st.x0, noise), noise)));
  }
  if (mode == "exact") {
    r.criteria.push_back(upper_bound("max_rms_discrepancy", *std::max_element(err.begin(), err.end()),
                                     cfg.get<double>("ito.exact_tolerance")));
  } else if (mode == "slope") {
    add_slope(r, "slope", h, err, cfg.get<double>("ito.slope_min"), cfg.get<double>("ito.slope_max"));
  } else {
    throw ConfigError("config key 'ito.mode' must be 'slope' or 'exact'");
  }
  return r;
}

ExperimentResult check_ito_wentzel(const ExperimentConfig& cfg, const Setup& st) {
  ExperimentResult r;
  const auto field = get_field_setup(cfg.get<std::string>("ito_wentzel.field"), st.scenario.dim(), st.scenario.wiener_dim());
  const auto mode = cfg.get<std::string>("ito_wentzel.mode");
  if (mode == "reduction") {
    std::vector<double> worst(st.n_paths, 0.0);
    parallel_for(st.n_paths, [&](std::size_t i) {
      const auto noise = path_noise(st, st.grid, i);
      const auto composite = ito_wentzel_series(field, st.scenario, st.x0, noise);
      const auto ito = ito_series(field.initial, st.scenario, composite.path, noise);
      for (std::size_t k = 0; k < ito.increments.size(); ++k) {
        const double d = std::abs(composite.series.increments[k] - ito.increments[k]);
        worst[i] = std::max(worst[i], d / std::max(1.0, std::abs(ito.increments[k])));
      }
    });
    r.criteria.push_back(upper_bound("max_relative_increment_difference", *std::max_element(worst.begin(), worst.end()),
                                     cfg.get<double>("ito_wentzel.reduction_tolerance")));
    return r;
  }
  if (mode != "consistency") throw ConfigError("config key 'ito_wentzel.mode' must be 'consistency' or 'reduction'");
  const std::size_t levels = count(cfg, "ito_wentzel.levels");
  const auto h = steps_of(st.grid, levels);
  const auto err = level_rms(st, levels, [&](const NoiseRealization& noise) {
    return composite_consistency(field, st.scenario, st.x0, noise).terminal_difference;
  });
  r.tables.emplace_back("ito_wentzel_levels.csv", level_table(h, err, "rms_terminal_difference"));
  {
    const auto rep = composite_consistency(field, st.scenario, st.x0, path_noise(st, st.grid, 0));
    r.tables.emplace_back("ito_wentzel_series_0.csv", series_table(rep.composite));
  }
  add_slope(r, "slope", h, err, cfg.get<double>("ito_wentzel.slope_min"), std::numeric_limits<double>::infinity());
  return r;
}

std::vector<double> numbers(const json& arr) {
  std::vector<double> out;
  for (const auto& v : arr) out.push_back(v.get<double>());
  return out;
}

ExperimentResult kernel(const ExperimentConfig& cfg, const Setup& st) {
  ExperimentResult r;
  const auto& s = st.scenario;
  const auto n = static_cast<Eigen::Index>(s.dim());
  const auto noise = path_noise(st, st.grid, 0);
  const auto rho0 = gaussian_kernel(Vector::Constant(n, cfg.get<double>("kernel.mean")), cfg.get<double>("kernel.sd"));

  DomainBox region{Vector::Constant(n, cfg.get<double>("kernel.x_min")), Vector::Constant(n, cfg.get<double>("kernel.x_max"))};
  const auto volume = volume_invariance(rho0, s, noise, count(cfg, "kernel.cells"), region);
  r.criteria.push_back(upper_bound("initial_sum_error", std::abs(volume.initial_sum - 1.0),
                                   cfg.get<double>("kernel.quadrature_tolerance")));
  r.criteria.push_back(upper_bound("pushforward_identity",
                                   std::abs(volume.pushforward_sum - volume.initial_sum) / std::abs(volume.initial_sum),
                                   cfg.get<double>("kernel.identity_tolerance")));

  const auto starts = numbers(cfg.at("kernel.starts"));
  {
    CsvTable t;
    t.header = {"start", "t", "x", "det", "rho"};
    for (double y : starts) {
      const auto series = kernel_along_path(rho0, s, Vector::Constant(n, y), noise);
      for (std::size_t k = 0; k < series.values.size(); ++k) {
        t.add_row({format_double(y), format_double(st.grid.time(k)), format_double(series.path.states[k][0]),
                   format_double(series.dets[k]), format_double(series.values[k])});
      }
    }
    r.tables.emplace_back("kernel_characteristics.csv", std::move(t));
  }

  if (s.dim() == 1) {
    const SpatialGrid space{cfg.get<double>("kernel.x_min"), cfg.get<double>("kernel.x_max"), count(cfg, "kernel.nodes", 3)};
    const auto run = kernel_spde_solve(rho0, s, noise, space);
    r.warnings.insert(r.warnings.end(), run.warnings.begin(), run.warnings.end());
    double drift = 0.0;
    for (double mass : run.mass) drift = std::max(drift, std::abs(mass - run.mass.front()));
    r.criteria.push_back(upper_bound("grid_mass_drift", drift, cfg.get<double>("kernel.mass_tolerance")));
    r.criteria.push_back(at_least("grid_min_value", run.min_value, -cfg.get<double>("kernel.negativity_tolerance")));
    const auto cmp = compare_with_characteristics(run, rho0, s, noise, starts);
    r.criteria.push_back(upper_bound("grid_vs_characteristics", cmp.max_abs_error,
                                     cfg.get<double>("kernel.characteristic_tolerance")));

    const auto rho1 = gaussian_kernel(Vector::Constant(1, cfg.get<double>("kernel.ratio_mean")),
                                      cfg.get<double>("kernel.ratio_sd"));
    const KernelInit pair[] = {rho1, rho0};
    const auto chars = kernel_ratio_integrals(pair, s, st.x0, noise);
    r.criteria.push_back(upper_bound("characteristic_ratio_deviation", chars.max_deviation[0],
                                     cfg.get<double>("kernel.identity_tolerance")));
    const auto grid_ratio = grid_kernel_ratio(rho1, rho0, s, st.x0[0], noise, space);
    r.criteria.push_back(upper_bound("grid_ratio_deviation", grid_ratio.max_deviation,
                                     cfg.get<double>("kernel.ratio_tolerance")));

    CsvTable snap;
    snap.header = {"t", "mass"};
    for (std::size_t i = 0; i < space.nodes; ++i) snap.header.push_back("x" + std::to_string(i));
    const std::size_t stride = count(cfg, "kernel.snapshot_stride");
    for (std::size_t k = 0; k < run.states.size(); ++k) {
      if (k % stride != 0 && k + 1 != run.states.size()) continue;
      std::vector<std::string> row{format_double(run.states[k].time), format_double(run.mass[k])};
      for (double v : run.states[k].values) row.push_back(format_double(v));
      snap.add_row(std::move(row));
    }
    r.tables.emplace_back("kernel_grid.csv", std::move(snap));

    CsvTable ratio;
    ratio.header = {"t", "x", "grid_ratio", "characteristic_ratio"};
    for (std::size_t k = 0; k < grid_ratio.ratios.size(); ++k) {
      ratio.add_row({format_double(grid_ratio.times[k]), format_double(grid_ratio.points[k]),
                     format_double(grid_ratio.ratios[k]), format_double(chars.ratios(static_cast<Eigen::Index>(k), 0))});
    }
    r.tables.emplace_back("kernel_ratio.csv", std::move(ratio));
  }
  return r;
}

ExperimentResult first_integral(const ExperimentConfig& cfg, const Setup& st) {
  ExperimentResult r;
  const auto& s = st.scenario;
  const auto cand = get_candidate(cfg.get<std::string>("first_integral.candidate"), s.dim());
  const auto times = numbers(cfg.at("first_integral.times"));
  const auto lattice = condition_lattice(s.box, count(cfg, "first_integral.lattice"), times);

  r.criteria.push_back(upper_bound("derivative_consistency", candidate_derivative_error(cand, lattice),
                                   cfg.get<double>("first_integral.derivative_tolerance")));
  const auto report = check_conditions(cand, s, lattice, cfg.get<double>("first_integral.tolerance"));
  CsvTable residuals;
  residuals.header = {"name", "sup", "t"};
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(s.dim()); ++i) residuals.header.push_back("x" + std::to_string(i));
  for (const auto& res : report.residuals) {
    r.criteria.push_back(upper_bound(res.name, res.sup, report.tolerance));
    std::vector<std::string> row{res.name, format_double(res.sup), format_double(res.at.t)};
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(s.dim()); ++i) {
      row.push_back(res.at.x.size() > i ? format_double(res.at.x[i]) : "");
    }
    residuals.add_row(std::move(row));
  }
  r.tables.emplace_back("conditions.csv", std::move(residuals));
  if (!s.marks.empty()) {
    r.criteria.push_back(upper_bound("R3_preimage_gap", report.preimage_gap,
                                     cfg.get<double>("first_integral.preimage_tolerance")));
  }

  const auto study = conservation_study(cand, s, st.x0, st.grid, count(cfg, "first_integral.levels"), st.n_paths, st.seed);
  std::vector<double> means, maxima;
  CsvTable oracle;
  oracle.header = {"level", "h", "mean_deviation", "max_deviation", "diverged"};
  for (std::size_t l = 0; l < study.levels.size(); ++l) {
    const auto& lv = study.levels[l];
    means.push_back(lv.mean);
    oracle.add_row({std::to_string(l), format_double(study.steps[l]), format_double(lv.mean), format_double(lv.max),
                    std::to_string(lv.diverged)});
  }
  r.tables.emplace_back("oracle_levels.csv", std::move(oracle));
  if (std::all_of(means.begin(), means.end(), [](double v) { return v == 0.0; })) {
    r.criteria.push_back(upper_bound("oracle_mean_deviation", 0.0, 0.0));
  } else {
    add_slope(r, "oracle_slope", study.steps, means, cfg.get<double>("first_integral.slope_min"),
              cfg.get<double>("first_integral.slope_max"));
  }

  const auto noise = path_noise(st, st.grid, 0);
  try {
    r.tables.emplace_back("eq35_series_0.csv",
                          series_table(eq35_residual_series(cand, s, simulate_path(s, st.x0, noise), noise)));
  } catch (const Error& e) {
    r.warnings.push_back(std::string("residual series skipped: ") + e.what());
  }
  return r;
}

ExperimentResult convergence(const ExperimentConfig& cfg, const Setup& st) {
  ExperimentResult r;
  const auto& s = st.scenario;
  const std::size_t levels = count(cfg, "convergence.levels", 2);
  const std::size_t refine = count(cfg, "convergence.reference_refine", 2);
  const auto h = steps_of(st.grid, levels);

  std::vector<std::vector<double>> err(levels, std::vector<double>(st.n_paths));
  parallel_for(st.n_paths, [&](std::size_t i) {
    const auto chain = refine_chain(path_noise(st, st.grid, i), levels);
    const auto fine = refine_noise(chain.back(), refine);
    const Vector ref = s.exact_terminal ? s.exact_terminal(st.x0, fine) : simulate_path(s, st.x0, fine).terminal();
    for (std::size_t l = 0; l < levels; ++l) err[l][i] = (simulate_path(s, st.x0, chain[l]).terminal() - ref).norm();
  });
  std::vector<double> e;
  for (const auto& v : err) e.push_back(rms(v));
  r.tables.emplace_back("convergence_levels.csv", level_table(h, e, "rms_terminal_error"));
  add_slope(r, "slope", h, e, cfg.get<double>("convergence.slope_min"), cfg.get<double>("convergence.slope_max"));
  return r;
}

ExperimentResult validate(const ExperimentConfig& cfg, const Setup& st) {
  ExperimentResult r;
  const auto points = box_lattice(st.scenario.box, count(cfg, "validate.per_axis"), cfg.get<double>("validate.inset"));
  const auto report = validate_scenario(st.scenario, points, cfg.get<double>("validate.delta"),
                                        cfg.get<double>("validate.tolerance"));
  CsvTable t;
  t.header = {"coefficient", "max_error", "row", "col", "at"};
  for (const auto& e : report.entries) {
    std::string at;
    for (Eigen::Index i = 0; i < e.at.size(); ++i) at += (i ? " " : "") + format_double(e.at[i]);
    t.add_row({e.coefficient, format_double(e.max_error), std::to_string(e.row), std::to_string(e.col), at});
  }
  r.tables.emplace_back("validation.csv", std::move(t));
  r.criteria.push_back(upper_bound("max_derivative_error", report.max_error(), report.tolerance));
  return r;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const Setup st = setup(cfg);
  ExperimentResult r;
  const auto& name = cfg.experiment();
  if (name == "simulate") r = simulate(cfg, st);
  else if (name == "check-ito") r = check_ito(cfg, st);
  else if (name == "check-ito-wentzel") r = check_ito_wentzel(cfg, st);
  else if (name == "kernel") r = kernel(cfg, st);
  else if (name == "first-integral") r = first_integral(cfg, st);
  else if (name == "convergence") r = convergence(cfg, st);
  else if (name == "validate") r = validate(cfg, st);
  else throw ConfigError("unknown experiment '" + name + "'");
  r.experiment = name;
  r.scenario = st.scenario.name;
  r.seed = st.seed;
  return r;
}

}  // namespace jumpsde::cli
