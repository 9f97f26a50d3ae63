// Acceptance gate: one PASS/FAIL line per criterion; exit status 1 if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli/app.hpp"
#include "jumpsde/calculus.hpp"
#include "jumpsde/integral.hpp"
#include "jumpsde/jacobian.hpp"
#include "jumpsde/kernel.hpp"
#include "jumpsde/parallel.hpp"
#include "support/oracles.hpp"

using namespace jumpsde;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [failed]");
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

NoiseRealization noise_for(const Scenario& s, std::size_t steps, std::uint64_t seed, double T = 1.0) {
  return sample_noise(build_grid(0.0, T, steps), s.wiener_dim(), s.marks, seed);
}

Vector start_for(const Scenario& s) { return Vector::Constant(static_cast<Eigen::Index>(s.dim()), 0.3); }

// RMS per level of error(noise) over coupled refinement chains; path i uses seed 1 + i.
std::vector<double> coupled_rms(const Scenario& s, std::size_t coarse, std::size_t levels, std::size_t paths,
                                const std::function<double(const NoiseRealization&)>& error) {
  std::vector<std::vector<double>> err(levels, std::vector<double>(paths));
  parallel_for(paths, [&](std::size_t i) {
    const auto chain = refine_chain(noise_for(s, coarse, 1 + i), levels);
    for (std::size_t l = 0; l < levels; ++l) err[l][i] = error(chain[l]);
  });
  std::vector<double> out;
  for (const auto& e : err) out.push_back(oracle::rms(e));
  return out;
}

std::vector<double> steps(std::size_t coarse, std::size_t levels) {
  std::vector<double> h;
  for (std::size_t l = 0; l < levels; ++l) h.push_back(1.0 / static_cast<double>(coarse << l));
  return h;
}

Outcome c1_validation() {
  Outcome o;
  for (const auto& name : scenario_names()) {
    const auto s = get_scenario(name);
    const auto pts = box_lattice(s.box, 5);
    const auto r = validate_scenario(s, pts, 1e-5, 1e-6);
    o.check(r.pass, name + " " + fmt(r.max_error()));
  }
  return o;
}

Outcome c2_strong_convergence() {
  const auto s = get_scenario("ou1d", {{"sigma", 0.5}, {"c", 1.0}, {"rate", 1.0}});
  const Vector x0 = Vector::Constant(1, 1.0);
  // Reference on the finest level refined 32x, shared by all levels of a path.
  std::vector<std::vector<double>> e(4, std::vector<double>(200));
  parallel_for(200, [&](std::size_t i) {
    const auto chain = refine_chain(noise_for(s, 64, 1 + i), 4);
    const double ref = oracle::ou_terminal(1.0, 0.5, 1.0, refine_noise(chain.back(), 32));
    for (std::size_t l = 0; l < 4; ++l) e[l][i] = simulate_path(s, x0, chain[l]).terminal()[0] - ref;
  });
  std::vector<double> rms;
  for (const auto& v : e) rms.push_back(oracle::rms(v));
  const double slope = oracle::log2_slope(steps(64, 4), rms);
  Outcome o;
  o.check(slope >= 0.7 && slope <= 1.3, "slope " + fmt(slope) + " in [0.7, 1.3], rms " + fmt(rms.front()) + " -> " + fmt(rms.back()));
  return o;
}

Outcome c3_jacobian() {
  Outcome o;
  const auto rot = get_scenario("rot2d");
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto noise = noise_for(rot, 1024, seed);
    const auto run = simulate_jacobian(rot, Vector::Unit(2, 0), noise);
    const Matrix fd = jacobian_fd_oracle(rot, Vector::Unit(2, 0), noise, 1e-4);
    worst = std::max(worst, (run.jacobian.matrices.back() - fd).lpNorm<Eigen::Infinity>());
  }
  o.check(worst <= 5e-3, "rot2d max |J_var - J_fd| " + fmt(worst) + " <= 5e-3");

  const auto frz = get_scenario("freeze");
  const auto fnoise = noise_for(frz, 1024, 1);
  const auto frun = simulate_jacobian(frz, Vector::Constant(1, 0.5), fnoise);
  bool identity = true;
  for (const auto& m : frun.jacobian.matrices) identity = identity && m(0, 0) == 1.0;
  const double fd = jacobian_fd_oracle(frz, Vector::Constant(1, 0.5), fnoise, 1e-4)(0, 0);
  o.check(identity && std::abs(fd - 1.0) <= 1e-12, "freeze J == I");

  const double h = 1.0 / 1024;
  struct Det {
    Scenario s;
    Vector x0;
    double expect;
  };
  const std::vector<Det> dets = {
      {get_scenario("ou1d", {{"sigma", 0.0}, {"rate", 0.0}}), Vector::Constant(1, 1.0), std::exp(-1.0)},
      {get_scenario("rotdrift2d"), Vector::Unit(2, 0), 1.0},
      {get_scenario("drift1d"), Vector::Zero(1), 1.0},
      {frz, Vector::Zero(1), 1.0},
  };
  for (const auto& d : dets) {
    const double det = simulate_jacobian(d.s, d.x0, noise_for(d.s, 1024, 1)).jacobian.dets.back();
    o.check(std::abs(det - d.expect) <= 2.0 * h, d.s.name + " det " + fmt(det));
  }
  return o;
}

Outcome c4_ito() {
  Outcome o;
  double worst = 0.0;
  for (const auto& name : scenario_names()) {
    const auto s = get_scenario(name);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto noise = noise_for(s, 128, seed);
      const auto path = simulate_path(s, start_for(s), noise);
      for (const auto& cand : {"const", "identity"}) {
        worst = std::max(worst, ito_series(get_candidate(cand, s.dim()).u, s, path, noise).discrepancy);
      }
    }
  }
  o.check(worst <= 1e-12, "const/identity max discrepancy " + fmt(worst));

  worst = 0.0;
  for (const auto& name : {"shift1d", "tanhjump1d"}) {
    const auto s = get_scenario(name);
    for (const auto& cand : {"x1-squared", "radius2"}) {
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto noise = noise_for(s, 128, seed);
        worst = std::max(worst, ito_series(get_candidate(cand, 1).u, s, simulate_path(s, start_for(s), noise), noise).discrepancy);
      }
    }
  }
  o.check(worst <= 1e-12, "pure-jump max discrepancy " + fmt(worst));

  const auto bm = get_scenario("brownian1d");
  const auto f = get_candidate("x1-squared", 1).u;
  const auto rms = coupled_rms(bm, 64, 4, 1000, [&](const NoiseRealization& noise) {
    const auto series = ito_series(f, bm, simulate_path(bm, Vector::Zero(1), noise), noise);
    return series.cumulative.back() - series.direct_change;
  });
  const double slope = oracle::log2_slope(steps(64, 4), rms);
  o.check(slope >= 0.4 && slope <= 1.1, "x^2 under dx = dw slope " + fmt(slope) + " in [0.4, 1.1]");
  return o;
}

Outcome c5_reduction() {
  Outcome o;
  double worst = 0.0;
  for (const auto& name : scenario_names()) {
    const auto s = get_scenario(name);
    const auto field = get_field_setup("static-smooth", s.dim(), s.wiener_dim());
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto noise = noise_for(s, 128, seed);
      const auto comp = ito_wentzel_series(field, s, start_for(s), noise);
      const auto ito = ito_series(field.initial, s, comp.path, noise);
      for (std::size_t k = 0; k < ito.increments.size(); ++k) {
        const double d = std::abs(comp.series.increments[k] - ito.increments[k]);
        worst = std::max(worst, d / std::max(std::abs(ito.increments[k]), 1e-300));
      }
    }
  }
  o.check(worst <= 1e-12, "max relative increment difference " + fmt(worst));
  return o;
}

Outcome c6_consistency() {
  const auto s = get_scenario("rot2d");
  const auto field = get_field_setup("rot2d-mixed", 2, 1);
  const auto rms = coupled_rms(s, 64, 4, 500, [&](const NoiseRealization& noise) {
    return composite_consistency(field, s, Vector::Unit(2, 0), noise).terminal_difference;
  });
  const double slope = oracle::log2_slope(steps(64, 4), rms);
  Outcome o;
  o.check(slope >= 0.4, "slope " + fmt(slope) + " >= 0.4, rms " + fmt(rms.front()) + " -> " + fmt(rms.back()));
  return o;
}

Outcome c7_kernel_grid() {
  Outcome o;
  const auto s = get_scenario("ou1d", {{"sigma", 0.0}, {"rate", 0.0}});
  const auto k = gaussian_kernel(Vector::Zero(1), 1.0);
  const SpatialGrid space{-6.0, 6.0, 801};
  const auto run = kernel_spde_solve(k, s, noise_for(s, 1000, 1, 0.5), space);
  double err = 0.0;
  for (std::size_t i = 0; i < space.nodes; ++i) {
    const double exact = oracle::linear_contraction_density([](double x) { return oracle::normal_pdf(x); }, 0.5, space.x(i));
    err = std::max(err, std::abs(run.states.back().values[i] - exact));
  }
  o.check(err <= 1e-3, "L_inf vs closed form " + fmt(err) + " <= 1e-3");
  double drift = 0.0;
  for (double m : run.mass) drift = std::max(drift, std::abs(m - run.mass.front()));
  o.check(drift <= 1e-3, "mass drift " + fmt(drift) + " <= 1e-3");

  const auto shift = get_scenario("shift1d", {{"c", 0.5}, {"rate", 1.0}});
  const NoiseRealization one_jump(build_grid(0.0, 1.0, 10), Matrix::Zero(10, 1), {{0.45, 0}}, shift.marks, 0);
  const auto jr = kernel_spde_solve(k, shift, one_jump, space);
  double jerr = 0.0;
  for (std::size_t i = 0; i < space.nodes; ++i) {
    jerr = std::max(jerr, std::abs(jr.states.back().values[i] - oracle::normal_pdf(space.x(i) - 0.5)));
  }
  const double bound = space.dx() * space.dx() / 8.0 * oracle::normal_pdf(0.0);
  o.check(jerr <= bound, "shift jump " + fmt(jerr) + " <= interpolation bound " + fmt(bound));
  return o;
}

Outcome c8_volume() {
  Outcome o;
  const auto k = gaussian_kernel(Vector::Zero(1), 1.0);
  const DomainBox region{Vector::Constant(1, -6.0), Vector::Constant(1, 6.0)};
  double identity = 0.0, mass = 0.0;
  for (const auto& name : {"ou1d", "nonlin1d", "tanhjump1d", "brownian1d"}) {
    const auto s = get_scenario(name);
    const auto r = volume_invariance(k, s, noise_for(s, 256, 3), 400, region);
    identity = std::max(identity, std::abs(r.pushforward_sum - r.initial_sum));
    mass = std::max(mass, std::abs(r.initial_sum - 1.0));
  }
  o.check(identity <= 1e-14, "pushforward - initial " + fmt(identity));
  o.check(mass <= 1e-6, "initial sum - 1 " + fmt(mass));

  const auto s = get_scenario("ou1d", {{"sigma", 0.3}, {"c", 0.5}, {"rate", 2.0}});
  const SpatialGrid space{-6.0, 6.0, 801};
  const double starts[] = {-1.0, 0.0, 0.5, 1.0};
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto noise = noise_for(s, 1000, seed, 0.5);
    const auto run = kernel_spde_solve(k, s, noise, space);
    worst = std::max(worst, compare_with_characteristics(run, k, s, noise, starts).max_abs_error);
  }
  o.check(worst <= 5e-2, "grid vs characteristics at pushed points " + fmt(worst) + " <= 5e-2");
  return o;
}

Outcome c9_ratios() {
  Outcome o;
  const auto s = get_scenario("ou1d", {{"sigma", 0.0}, {"rate", 0.0}});
  const SpatialGrid space{-6.0, 6.0, 801};
  const auto num = gaussian_kernel(Vector::Constant(1, 0.5), 1.2);
  const auto den = gaussian_kernel(Vector::Zero(1), 1.0);
  const auto noise = noise_for(s, 1000, 1, 0.5);
  const auto grid = grid_kernel_ratio(num, den, s, 0.5, noise, space);
  o.check(grid.max_deviation <= 5e-2, "grid ratio deviation " + fmt(grid.max_deviation) + " <= 5e-2");

  double worst = 0.0;
  const KernelInit pair[] = {num, den};
  worst = std::max(worst, kernel_ratio_integrals(pair, s, Vector::Constant(1, 0.5), noise).max_deviation[0]);
  const auto rot = get_scenario("rot2d");
  const KernelInit triple[] = {gaussian_kernel(Vector::Zero(2), 1.0), gaussian_kernel(Vector::Unit(2, 1), 0.7),
                               gaussian_kernel(Vector::Unit(2, 0), 1.3)};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = kernel_ratio_integrals(triple, rot, Vector::Unit(2, 0), noise_for(rot, 512, seed));
    worst = std::max({worst, r.max_deviation[0], r.max_deviation[1]});
  }
  o.check(worst <= 1e-12, "characteristic ratio deviation " + fmt(worst) + " <= 1e-12");
  return o;
}

Outcome c10_conditions() {
  Outcome o;
  const auto s = get_scenario("rot2d");
  const auto u = get_candidate("radius2", 2);
  const double t0[] = {0.0};
  const auto lattice = condition_lattice(s.box, 21, t0);
  const auto r = check_conditions(u, s, lattice);
  o.check(r.pass, "R1 " + fmt(r.get("R1").sup) + ", R2 " + fmt(r.get("R2").sup) + ", R3 " + fmt(r.get("R3").sup) + " <= 1e-9");

  const auto study = conservation_study(u, s, Vector::Unit(2, 0), build_grid(0.0, 1.0, 128), 3, 500, 1);
  std::vector<double> means;
  for (const auto& l : study.levels) means.push_back(l.mean);
  const double slope = oracle::log2_slope(study.steps, means);
  o.check(slope >= 0.7 && slope <= 1.3, "oracle slope " + fmt(slope) + " in [0.7, 1.3] (means " + fmt(means.front()) +
                                            " -> " + fmt(means.back()) + ")");

  const auto bad = get_scenario("rot2d", {{"drift_eps", 0.1}});
  const auto rb = check_conditions(u, bad, lattice);
  o.check(rb.get("R2").sup >= 0.1, "perturbed R2 " + fmt(rb.get("R2").sup) + " >= 0.1");
  const auto bstudy = conservation_study(u, bad, Vector::Unit(2, 0), build_grid(0.0, 1.0, 128), 3, 500, 1);
  double floor = INFINITY;
  for (const auto& l : bstudy.levels) floor = std::min(floor, l.mean);
  o.check(floor >= 0.01, "perturbed oracle plateau " + fmt(floor) + " >= 0.01");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome c11_determinism() {
  Outcome o;
  const auto root = fs::temp_directory_path() / "jumpsde_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> runs = {
      {"simulate", "--seed", "17", "--set", "seeds.n_paths=3", "--set", "grid.n_steps=256"},
      {"check-ito-wentzel", "--seed", "17", "--set", "seeds.n_paths=20"},
      {"first-integral", "--seed", "17", "--set", "seeds.n_paths=20"},
      {"kernel", "--seed", "17", "--set", "scenario.params.sigma=0.3", "--set", "scenario.params.rate=1"},
  };
  for (const auto& args : runs) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      dirs.push_back(root / (args.front() + "_" + std::to_string(rep)));
      auto full = args;
      full.push_back("--out");
      full.push_back(dirs.back().string());
      std::ostringstream out, err;
      cli::run(full, out, err);
    }
    std::size_t files = 0;
    bool same = true;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      same = same && slurp(entry.path()) == slurp(dirs[1] / entry.path().filename());
    }
    o.check(same && files > 0, args.front() + " " + std::to_string(files) + " CSVs identical");
  }
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 scenario validation", c1_validation},
      {"2 integrator strong convergence", c2_strong_convergence},
      {"3 jacobian oracle equivalence", c3_jacobian},
      {"4 generalized Ito formula", c4_ito},
      {"5 Ito-Wentzell reduction", c5_reduction},
      {"6 Ito-Wentzell two-way consistency", c6_consistency},
      {"7 kernel SPDE grid solver", c7_kernel_grid},
      {"8 volume invariance", c8_volume},
      {"9 kernel ratios", c9_ratios},
      {"10 conditions L and conservation oracle", c10_conditions},
      {"11 CLI determinism", c11_determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
