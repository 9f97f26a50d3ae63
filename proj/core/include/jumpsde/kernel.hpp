#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "jumpsde/calculus.hpp"
#include "jumpsde/jacobian.hpp"

namespace jumpsde {

/// Initial kernel density ρ0(x) >= 0.
struct KernelInit {
  std::string name;
  std::function<double(const Vector&)> density;  // already normalized
  double normalization = 1.0;                    // the constant folded into `density`
  double decay_radius = 0.0;                     // ρ0 < 1e-12 beyond this distance from `center`
  Vector center;

  double operator()(const Vector& x) const { return density(x); }
};

/// Isotropic Gaussian N(mean, sd² I).
KernelInit gaussian_kernel(const Vector& mean, double sd);

struct KernelInitCheck {
  double mass = 0.0;          // midpoint quadrature over the box
  double boundary_max = 0.0;  // largest ρ0 on the box faces
  bool pass = false;          // |mass - 1| <= mass_tol and boundary_max < 1e-12
};

KernelInitCheck check_kernel_init(const KernelInit& k, const DomainBox& box, std::size_t cells_per_axis,
                                  double mass_tol = 1e-6);

struct KernelSeries {
  Path path;
  std::vector<double> dets;
  std::vector<double> values;  // ρ(t_k, x(t_k; y)) = ρ0(y) / det J(t_k; y)
};

/// Characteristic representation ρ(t, x(t;y)) det J(t;y) = ρ0(y). Throws DegenerateJacobian if |det J| < 1e-12.
KernelSeries kernel_along_path(const KernelInit& k, const Scenario& s, const Vector& y, const NoiseRealization& noise);

struct VolumeReport {
  double pushforward_sum = 0.0;  // Σ ρ(T, x(T;y_c)) det J(T;y_c) ΔV
  double initial_sum = 0.0;      // Σ ρ0(y_c) ΔV
  std::size_t cells = 0;
};

/// Pushes the cell midpoints of `region` (n <= 2, cells_per_axis per axis) through the flow.
VolumeReport volume_invariance(const KernelInit& k, const Scenario& s, const NoiseRealization& noise,
                               std::size_t cells_per_axis, const DomainBox& region);

struct SpatialGrid {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t nodes = 0;

  double dx() const { return (x_max - x_min) / static_cast<double>(nodes - 1); }
  double x(std::size_t i) const;
};

struct KernelGridState {
  std::size_t node = 0;  // time node index
  double time = 0.0;
  std::vector<double> values;
};

struct KernelGridRun {
  SpatialGrid space;
  TimeGrid grid;
  std::vector<KernelGridState> states;  // one per time node
  std::vector<double> mass;             // trapezoid ∫ρ per time node
  double min_value = 0.0;
  std::vector<std::string> warnings;
};

/// Largest stable step for the explicit scheme: min(0.4 Δx² / max b², 0.4 Δx / max|a|) over the grid at time t.
double kernel_max_step(const Scenario& s, const SpatialGrid& space, double t);

/// Explicit scheme for the 1D kernel SPDE with zero boundary values:
///   dρ = [-∂(ρa) + ½∂²(ρb²)] h - ∂(ρb) dW + Σ_events [ρ(y(x)) |det_inv(x)| - ρ(x)].
/// The drift flux is upwinded with a limited (MC) linear reconstruction; diffusion and noise use
/// central differences. Throws StepSizeError when h exceeds kernel_max_step.
KernelGridRun kernel_spde_solve(const KernelInit& k, const Scenario& s, const NoiseRealization& noise,
                                const SpatialGrid& space);

double trapezoid(std::span<const double> values, double dx);
/// Linear interpolation; zero outside the grid.
double interpolate(const SpatialGrid& space, std::span<const double> values, double x);

struct CharacteristicComparison {
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;  // relative to max ρ along each characteristic
};

/// Grid solution interpolated at x(t_k; y) against ρ0(y)/det J(t_k; y), over all nodes and starts.
CharacteristicComparison compare_with_characteristics(const KernelGridRun& run, const KernelInit& k, const Scenario& s,
                                                      const NoiseRealization& noise, std::span<const double> starts);

struct RatioSeries {
  Path path;
  Matrix ratios;                       // nodes x n: θ_l(t_k)
  std::vector<double> max_deviation;   // max_t |θ_l(t) - θ_l(0)|
};

/// θ_l = ρ_l / ρ_{n+1} along x(t; y) via the characteristic representation; needs n+1 kernels.
/// Throws RatioUndefined if ρ_{n+1}(y) is not positive.
RatioSeries kernel_ratio_integrals(std::span<const KernelInit> kernels, const Scenario& s, const Vector& y,
                                   const NoiseRealization& noise);

struct GridRatioReport {
  std::vector<double> times;
  std::vector<double> points;  // x(t_k; y)
  std::vector<double> ratios;
  double initial = 0.0;
  double max_deviation = 0.0;
};

/// Grid-solver variant in 1D: ρ_num / ρ_den interpolated at x(t_k; y).
/// Throws RatioUndefined if the denominator falls below 1e-12 at a pushed point.
GridRatioReport grid_kernel_ratio(const KernelInit& numerator, const KernelInit& denominator, const Scenario& s,
                                  double y, const NoiseRealization& noise, const SpatialGrid& space);

}  // namespace jumpsde
