#pragma once

#include <cstddef>
#include <vector>

#include "jumpsde/integrate.hpp"

namespace jumpsde {

/// Variational matrix J(t) = ∂x(t)/∂x(0) along a path and its determinant at each node.
struct JacobianState {
  TimeGrid grid;
  std::vector<Matrix> matrices;
  std::vector<double> dets;
  /// Nodes where |det J| fell below kDegenerateDet; the recursion continues past them.
  std::vector<std::size_t> degenerate_nodes;
};

inline constexpr double kDegenerateDet = 1e-12;

struct JacobianRun {
  Path path;
  JacobianState jacobian;
};

/// LU determinant.
double determinant(const Matrix& m);

/// Euler recursion for the variational system driven by the same step as simulate_path:
///   J <- J + [∂a/∂x h + Σ_k ∂b_k/∂x dW_k] J,   J <- (I + ∂g/∂x(x⁻)) J per jump.
JacobianRun simulate_jacobian(const Scenario& s, const Vector& x0, const NoiseRealization& noise);

/// Central bump-and-rerun estimate of ∂x(T)/∂x(0) on the same realization.
/// Throws OracleFailure if a bumped path diverges.
Matrix jacobian_fd_oracle(const Scenario& s, const Vector& x0, const NoiseRealization& noise, double delta);

}  // namespace jumpsde
