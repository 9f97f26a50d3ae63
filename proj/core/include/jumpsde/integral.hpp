#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jumpsde/calculus.hpp"
#include "jumpsde/slope.hpp"

namespace jumpsde {

struct FirstIntegralCandidate {
  std::string name;
  SmoothScalarField u;
};

/// "const" (u = 1), "identity" (u = x1), "radius2" (u = |x|²), "x-minus-t" (u = x1 - t),
/// "x1-squared" (u = x1², a test function rather than an integral of any registered scenario).
FirstIntegralCandidate get_candidate(std::string_view name, std::size_t n);
std::vector<std::string> candidate_names();

struct LatticePoint {
  double t = 0.0;
  Vector x;
};

/// per_axis^n points of box_lattice at each of `times`.
std::vector<LatticePoint> condition_lattice(const DomainBox& box, std::size_t per_axis, std::span<const double> times);

/// Max deviation of the candidate's analytic derivatives from finite differences of its value.
double candidate_derivative_error(const FirstIntegralCandidate& c, std::span<const LatticePoint> points);

struct ConditionResidual {
  std::string name;  // "R1" (or "R1_k" when m > 1), "R2", "R3"
  double sup = 0.0;
  LatticePoint at;
};

struct ConditionsReport {
  std::vector<ConditionResidual> residuals;
  double tolerance = 0.0;
  bool pass = true;
  /// max over nodes and marks of | |u(x) - u(x+g)| - |u(y_pre(x+g)) - u(x+g)| |; +inf if an inversion failed.
  double preimage_gap = 0.0;

  const ConditionResidual& get(std::string_view name) const;
  /// Names of residuals above the tolerance.
  std::vector<std::string> failing() const;
};

/// Conditions L on a lattice:
///   R1_k = |b_ik ∂u/∂x_i|,  R2 = |∂u/∂t + ∂u/∂x_i (a_i - ½ b_jk ∂b_ik/∂x_j)|,  R3 = max_γ |u(x) - u(x + g)|.
ConditionsReport check_conditions(const FirstIntegralCandidate& c, const Scenario& s,
                                  std::span<const LatticePoint> lattice, double tol = 1e-9);

/// Increments of
///   du = [-a_i ∂_i u + ½ b_ik b_jk ∂_ij u - b_ik ∂_i(b_jk ∂_j u)] h - b_ik ∂_i u dW_k + Σ_events [u(y_pre) - u(x⁻)]
/// along a simulated path, coefficients taken at the path state. A diagnostic, not a checker.
IncrementSeries eq35_residual_series(const FirstIntegralCandidate& c, const Scenario& s, const Path& path,
                                     const NoiseRealization& noise);

struct OracleStats {
  std::size_t paths = 0;
  std::size_t diverged = 0;
  double mean = 0.0;  // over surviving paths of max_k |u(t_k, x(t_k)) - u(t0, x0)|
  double max = 0.0;
  std::vector<double> per_path;  // NaN for diverged paths
};

/// Max deviation of u along one path.
double conservation_deviation(const FirstIntegralCandidate& c, const Path& path);

/// n_paths paths; path i uses seed base_seed + i.
OracleStats conservation_oracle(const FirstIntegralCandidate& c, const Scenario& s, const Vector& x0,
                                const TimeGrid& grid, std::size_t n_paths, std::uint64_t base_seed);

struct ConservationStudy {
  std::vector<double> steps;  // h per level, coarse to fine
  std::vector<OracleStats> levels;
  std::optional<SlopeFit> fit;  // absent when some level mean is zero
};

/// Coupled levels: each path's noise is sampled on the coarse grid and refined by Brownian bridges,
/// so all levels see the same realization. A path diverging at any level is excluded from every level.
ConservationStudy conservation_study(const FirstIntegralCandidate& c, const Scenario& s, const Vector& x0,
                                     const TimeGrid& coarse, std::size_t levels, std::size_t n_paths,
                                     std::uint64_t base_seed);

}  // namespace jumpsde
