#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "jumpsde/noise.hpp"
#include "jumpsde/system.hpp"
#include "jumpsde/types.hpp"

namespace jumpsde {

/// A jump applied at the end of step `step`, at node time `time`.
struct AppliedEvent {
  std::size_t step = 0;
  double time = 0.0;
  std::size_t mark_index = 0;
  Vector pre;
  Vector post;
};

struct Path {
  TimeGrid grid;
  std::vector<Vector> states;  // x(t_k), k = 0..n_steps, post-jump at each node
  std::vector<AppliedEvent> applied_events;

  const Vector& terminal() const { return states.back(); }
};

/// Hooks into the Euler recursion. Every callback sees the exact doubles the integrator uses.
class PathObserver {
 public:
  virtual ~PathObserver() = default;
  /// Before the continuous update of step k; x = x(t_k).
  virtual void on_step(std::size_t /*k*/, double /*t*/, const Vector& /*x*/) {}
  /// After the continuous update of step k and before its jumps; x is the pre-jump state.
  virtual void on_continuous(std::size_t /*k*/, const Vector& /*x*/) {}
  virtual void on_jump(const AppliedEvent& /*event*/) {}
};

/// States beyond this max-norm abort the path.
inline constexpr double kDivergenceBound = 1e8;

/// Euler–Maruyama with end-of-step jumps:
///   x <- x + a(t_k,x) h + b(t_k,x) dW_k,   then x <- x + g(t_{k+1}, x, γ) per event in step k.
/// Throws DivergedPath carrying the step index if the state leaves the guard.
Path simulate_path(const Scenario& s, const Vector& x0, const NoiseRealization& noise);
Path simulate_path(const Scenario& s, const Vector& x0, const NoiseRealization& noise, PathObserver& observer);

using InitialField = std::function<double(const Vector&)>;

struct FieldTrace {
  TimeGrid grid;
  std::vector<Vector> points;
  Matrix values;  // (n_steps + 1) x points.size()
};

/// Evolves z(t, x) at fixed points: z <- z + Π h + Σ_k D_k dW_k, then z <- z + G per event.
FieldTrace evolve_scalar_field(const ScalarFieldProcess& p, const InitialField& z0, std::span<const Vector> points,
                               const NoiseRealization& noise);

/// The accumulated field increment ζ(t, x) = z(t, x) - z0(x), evaluable at any point.
///
/// value(x, node, events) is ζ after the continuous updates of steps 0..node-1 and the first
/// `events` jump events (which must all belong to those steps). Time-homogeneous processes are
/// evaluated in closed form Π(x)(t-t0) + D(x)·W(t) + Σ G(x, γ); others replay the history.
class FieldIncrements {
 public:
  FieldIncrements(const ScalarFieldProcess& p, const NoiseRealization& noise);

  double value(const Vector& x, std::size_t node, std::size_t events) const;

 private:
  const ScalarFieldProcess* process_;
  const NoiseRealization* noise_;
};

}  // namespace jumpsde
