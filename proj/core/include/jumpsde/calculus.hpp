#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "jumpsde/integrate.hpp"

namespace jumpsde {

/// Scalar test function f(t, x). Missing derivative evaluators fall back to finite differences.
struct SmoothScalarField {
  std::function<double(double, const Vector&)> value;
  std::function<double(double, const Vector&)> time_derivative;
  std::function<Vector(double, const Vector&)> gradient;
  std::function<Matrix(double, const Vector&)> hessian;

  double operator()(double t, const Vector& x) const { return value(t, x); }
  double dt(double t, const Vector& x) const;
  Vector grad(double t, const Vector& x) const;
  Matrix hess(double t, const Vector& x) const;
};

/// Per-step predicted increments of a scalar process along a path.
struct IncrementSeries {
  TimeGrid grid;
  std::vector<double> increments;  // step k: continuous part plus the jumps of step k
  std::vector<double> cumulative;  // cumulative[k] = Σ_{j<=k} increments[j]
  std::vector<double> values;      // value at node k, updated term by term
  double direct_change = 0.0;      // change over [t0, T] evaluated directly
  double discrepancy = 0.0;        // |cumulative.back() - direct_change|

  double terminal() const { return values.back(); }
};

/// Generalized Itô formula along a simulated path:
///   [∂f/∂t + a·∇f + ½ Σ_k b_kᵀ ∇²f b_k] h + Σ_k (b_k·∇f) dW_k + Σ_events [f(x⁻ + g) - f(x⁻)].
/// Throws InvalidArgument when path and noise live on different grids.
IncrementSeries ito_series(const SmoothScalarField& f, const Scenario& s, const Path& path, const NoiseRealization& noise);

struct JumpPreimage {
  Vector y;
  double det_inv = 1.0;  // 1 / det(I + ∂g/∂y)(y)
  std::size_t iterations = 0;
};

inline constexpr std::size_t kMaxInversionIterations = 50;
inline constexpr double kSingularJumpDet = 1e-12;

/// Solves y + g(t, y; γ) = x by Newton from y0 = x - g(t, x; γ).
/// `iterations` counts residual evaluations, so an exact starting guess reports 1.
JumpPreimage inverse_jump_map(const Scenario& s, double t, const Vector& x, const Mark& mark, double tol = 1e-12);

using PointFunction = std::function<double(const Vector&)>;

/// z(x + g(t, x; γ)) - z(x).
double jump_term_forward(const PointFunction& z, const Scenario& s, double t, const Vector& x, const Mark& mark);
/// z(x') - z(x' - g(t, x⁻¹(x'); γ)) for a post-jump point x'.
double jump_term_preimage(const PointFunction& z, const Scenario& s, double t, const Vector& x_post, const Mark& mark,
                          double tol = 1e-12);

/// A random field z = z0 + ζ: its initial profile and the coefficients of its increments.
struct FieldSetup {
  std::string name;
  ScalarFieldProcess process;
  SmoothScalarField initial;
};

/// Registered field processes: "rot2d-mixed" (n=2), "additive-x1", "unit-drift", "static-smooth", "static-x1sq".
FieldSetup get_field_setup(std::string_view name, std::size_t n, std::size_t m);
std::vector<std::string> field_setup_names();

/// Stencil spacing for the increment field: 1e-3 * max(1, |x_i|).
double stencil_step(double xi) noexcept;

struct CompositeRun {
  Path path;
  IncrementSeries series;
};

/// Evolves Z(t) = z(t, x(t)) by the generalized Itô–Wentzell increments
///   [D_k + b_ik ∂_i z] dW_k + [Π + a_i ∂_i z + b_ik ∂_i D_k + ½ b_ik b_jk ∂_ij z] h
///   + Σ_events [G(x⁻ + g) + z(x⁻ + g) - z(x⁻)].
/// ∂z = ∂z0 + ∂ζ, with ∂ζ from a 5-point-per-axis stencil around x(t) evaluated on the coupled
/// field increments. Throws DomainExit if the stencil leaves the scenario box.
CompositeRun ito_wentzel_series(const FieldSetup& z, const Scenario& s, const Vector& x0, const NoiseRealization& noise);

struct ConsistencyReport {
  Path path;
  IncrementSeries composite;
  std::vector<double> node_differences;  // |Z(t_k) - z(t_k, x(t_k))|
  double terminal_difference = 0.0;      // against evolve_scalar_field at x(T)
};

/// Composite evolution against field-then-evaluate on the same realization.
ConsistencyReport composite_consistency(const FieldSetup& z, const Scenario& s, const Vector& x0,
                                        const NoiseRealization& noise);

}  // namespace jumpsde
