#include "jumpsde/integrate.hpp"

#include <cmath>
#include <string>

#include "jumpsde/errors.hpp"

namespace jumpsde {

namespace {

bool within_guard(const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || std::abs(x[i]) > kDivergenceBound) return false;
  }
  return true;
}

void check_dims(const Scenario& s, const Vector& x0, const NoiseRealization& noise) {
  if (static_cast<std::size_t>(x0.size()) != s.dim()) {
    throw InvalidArgument("initial state has dimension " + std::to_string(x0.size()) + ", scenario '" + s.name +
                          "' expects " + std::to_string(s.dim()));
  }
  if (noise.wiener_dim() != s.wiener_dim()) {
    throw InvalidArgument("noise has Wiener dimension " + std::to_string(noise.wiener_dim()) + ", scenario '" +
                          s.name + "' expects " + std::to_string(s.wiener_dim()));
  }
  if (noise.marks().size() != s.marks.size()) {
    throw InvalidArgument("noise mark space does not match scenario '" + s.name + "'");
  }
}

}  // namespace

Path simulate_path(const Scenario& s, const Vector& x0, const NoiseRealization& noise) {
  PathObserver none;
  return simulate_path(s, x0, noise, none);
}

Path simulate_path(const Scenario& s, const Vector& x0, const NoiseRealization& noise, PathObserver& observer) {
  check_dims(s, x0, noise);
  const auto& grid = noise.grid();
  const auto& c = s.coeffs;
  const double h = grid.step();

  Path path{grid, {}, {}};
  path.states.reserve(grid.nodes());
  path.states.push_back(x0);

  Vector x = x0;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    observer.on_step(k, t, x);
    const Vector a = c.drift(t, x);
    const Matrix b = c.diffusion(t, x);
    const auto dw = noise.increments().row(static_cast<Eigen::Index>(k)).transpose();
    x = x + a * h + b * dw;
    if (!within_guard(x)) throw DivergedPath("path diverged at step " + std::to_string(k), k);
    observer.on_continuous(k, x);

    const double t_next = grid.time(k + 1);
    for (const auto& e : noise.events_in_step(k)) {
      AppliedEvent applied{k, t_next, e.mark_index, x, {}};
      x = x + c.jump(t_next, x, noise.mark(e));
      if (!within_guard(x)) throw DivergedPath("path diverged at jump in step " + std::to_string(k), k);
      applied.post = x;
      observer.on_jump(applied);
      path.applied_events.push_back(std::move(applied));
    }
    path.states.push_back(x);
  }
  return path;
}

FieldTrace evolve_scalar_field(const ScalarFieldProcess& p, const InitialField& z0, std::span<const Vector> points,
                               const NoiseRealization& noise) {
  if (noise.wiener_dim() != p.m) throw InvalidArgument("field process and noise disagree on Wiener dimension");
  for (const auto& x : points) {
    if (static_cast<std::size_t>(x.size()) != p.n) throw InvalidArgument("field sample point has wrong dimension");
  }
  const auto& grid = noise.grid();
  const double h = grid.step();
  const auto npts = static_cast<Eigen::Index>(points.size());

  FieldTrace trace{grid, std::vector<Vector>(points.begin(), points.end()), Matrix(grid.nodes(), npts)};
  for (Eigen::Index j = 0; j < npts; ++j) trace.values(0, j) = z0(points[static_cast<std::size_t>(j)]);

  for (Eigen::Index j = 0; j < npts; ++j) {
    const Vector& x = points[static_cast<std::size_t>(j)];
    double z = trace.values(0, j);
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      const double t = grid.time(k);
      const Vector d = p.diffusion(t, x);
      double noise_sum = 0.0;
      for (std::size_t q = 0; q < p.m; ++q) noise_sum += d[static_cast<Eigen::Index>(q)] * noise.increment(k, q);
      z = z + (p.drift(t, x) * h + noise_sum);
      const double t_next = grid.time(k + 1);
      for (const auto& e : noise.events_in_step(k)) z = z + p.jump(t_next, x, noise.mark(e));
      if (!std::isfinite(z)) throw DivergedField("field diverged at step " + std::to_string(k), k);
      trace.values(static_cast<Eigen::Index>(k + 1), j) = z;
    }
  }
  return trace;
}

FieldIncrements::FieldIncrements(const ScalarFieldProcess& p, const NoiseRealization& noise)
    : process_(&p), noise_(&noise) {
  if (noise.wiener_dim() != p.m) throw InvalidArgument("field process and noise disagree on Wiener dimension");
}

double FieldIncrements::value(const Vector& x, std::size_t node, std::size_t events) const {
  const auto& p = *process_;
  const auto& noise = *noise_;
  const auto& grid = noise.grid();
  if (node > grid.steps()) throw InvalidArgument("FieldIncrements: node out of range");
  if (events > noise.events_before_step(node)) {
    throw InvalidArgument("FieldIncrements: events beyond the requested node");
  }

  if (p.time_homogeneous) {
    const double t0 = grid.t0();
    const Vector d = p.diffusion(t0, x);
    double zeta = p.drift(t0, x) * (grid.time(node) - grid.t0());
    for (std::size_t q = 0; q < p.m; ++q) {
      zeta += d[static_cast<Eigen::Index>(q)] * noise.wiener()(static_cast<Eigen::Index>(node), static_cast<Eigen::Index>(q));
    }
    const auto& ev = noise.events();
    for (std::size_t i = 0; i < events; ++i) {
      zeta += p.jump(grid.time(grid.step_containing(ev[i].time) + 1), x, noise.mark(ev[i]));
    }
    return zeta;
  }

  const double h = grid.step();
  double zeta = 0.0;
  std::size_t applied = 0;
  for (std::size_t k = 0; k < node; ++k) {
    const double t = grid.time(k);
    const Vector d = p.diffusion(t, x);
    double noise_sum = 0.0;
    for (std::size_t q = 0; q < p.m; ++q) noise_sum += d[static_cast<Eigen::Index>(q)] * noise.increment(k, q);
    zeta = zeta + (p.drift(t, x) * h + noise_sum);
    const double t_next = grid.time(k + 1);
    for (const auto& e : noise.events_in_step(k)) {
      if (applied == events) break;
      zeta = zeta + p.jump(t_next, x, noise.mark(e));
      ++applied;
    }
  }
  return zeta;
}

}  // namespace jumpsde
