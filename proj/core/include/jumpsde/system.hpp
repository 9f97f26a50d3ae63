#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jumpsde/noise.hpp"
#include "jumpsde/types.hpp"

namespace jumpsde {

using DriftFn = std::function<Vector(double, const Vector&)>;
using DiffusionFn = std::function<Matrix(double, const Vector&)>;
using JumpFn = std::function<Vector(double, const Vector&, const Mark&)>;
using DriftJacobianFn = std::function<Matrix(double, const Vector&)>;
/// One n x n matrix per Wiener component k: entry (i, j) is ∂b_ik/∂x_j.
using DiffusionJacobianFn = std::function<std::vector<Matrix>(double, const Vector&)>;
using JumpJacobianFn = std::function<Matrix(double, const Vector&, const Mark&)>;

/// Coefficients a(t,x), b(t,x), g(t,x;γ) of the jump-diffusion system, with optional
/// analytic first derivatives. Missing derivatives fall back to central differences.
struct CoefficientField {
  std::size_t n = 0;
  std::size_t m = 0;
  DriftFn drift;
  DiffusionFn diffusion;
  JumpFn jump;
  DriftJacobianFn drift_jacobian;
  DiffusionJacobianFn diffusion_jacobian;
  JumpJacobianFn jump_jacobian;

  bool has_analytic_derivatives() const noexcept {
    return static_cast<bool>(drift_jacobian) && static_cast<bool>(diffusion_jacobian) &&
           static_cast<bool>(jump_jacobian);
  }

  Matrix drift_derivative(double t, const Vector& x) const;
  std::vector<Matrix> diffusion_derivative(double t, const Vector& x) const;
  Matrix jump_derivative(double t, const Vector& x, const Mark& mark) const;
};

struct DomainBox {
  Vector lo;
  Vector hi;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(lo.size()); }
  bool contains(const Vector& x) const;
};

using ScenarioParams = std::map<std::string, double>;

struct Scenario {
  std::string name;
  CoefficientField coeffs;
  MarkSpace marks;
  DomainBox box;
  std::vector<std::string> known_integrals;
  std::string notes;
  ScenarioParams params;
  /// Closed-form terminal state x(T) for the given realization, when the scenario has one.
  std::function<Vector(const Vector&, const NoiseRealization&)> exact_terminal;

  std::size_t dim() const noexcept { return coeffs.n; }
  std::size_t wiener_dim() const noexcept { return coeffs.m; }
};

/// Returns the registered scenario with parameter overrides applied.
/// Unknown names throw NotFound (listing the registry); unknown parameters throw InvalidArgument.
Scenario get_scenario(std::string_view name, const ScenarioParams& overrides = {});
std::vector<std::string> scenario_names();
ScenarioParams default_params(std::string_view name);

/// Default central-difference step for coordinate value xj: 1e-5 * max(1, |xj|).
double fd_step(double xj) noexcept;

/// (f(x + Δe_j) - f(x - Δe_j)) / (2Δ).
double fd_derivative(const std::function<double(const Vector&)>& f, const Vector& x, std::size_t j, double delta);

/// Column j holds the central difference of F along e_j, using fd_step per component.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x);

struct ValidationEntry {
  std::string coefficient;  // "drift", "diffusion[k]", "jump[j]"
  double max_error = 0.0;
  std::size_t row = 0;
  std::size_t col = 0;
  Vector at;
};

struct ValidationReport {
  std::string scenario;
  std::vector<ValidationEntry> entries;
  double tolerance = 0.0;
  bool pass = true;

  double max_error() const;
};

/// Analytic derivatives against fd_derivative with step delta at every sample point.
ValidationReport validate_scenario(const Scenario& s, std::span<const Vector> points, double delta, double tol,
                                   double t = 0.0);

/// per_axis^n lattice covering the box shrunk by `inset` on each side.
std::vector<Vector> box_lattice(const DomainBox& box, std::size_t per_axis, double inset = 0.0);

/// Coefficients Π(t,x), D_k(t,x), G(t,x;γ) of a scalar random field z(t,x).
struct ScalarFieldProcess {
  std::size_t n = 0;
  std::size_t m = 0;
  std::function<double(double, const Vector&)> drift;
  std::function<Vector(double, const Vector&)> diffusion;
  std::function<double(double, const Vector&, const Mark&)> jump;
  /// Optional; entry (k, i) is ∂D_k/∂x_i.
  std::function<Matrix(double, const Vector&)> diffusion_gradient;
  /// Π, D, G do not depend on t.
  bool time_homogeneous = false;

  Matrix diffusion_derivative(double t, const Vector& x) const;
};

/// Π = D = G = 0.
ScalarFieldProcess static_field_process(std::size_t n, std::size_t m);

}  // namespace jumpsde
