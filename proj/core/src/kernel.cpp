#include "jumpsde/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "jumpsde/errors.hpp"
#include "jumpsde/parallel.hpp"

namespace jumpsde {

KernelInit gaussian_kernel(const Vector& mean, double sd) {
  if (!(sd > 0.0) || mean.size() == 0) throw InvalidArgument("gaussian_kernel: need sd > 0 and a non-empty mean");
  const double n = static_cast<double>(mean.size());
  const double norm = std::pow(2.0 * std::numbers::pi * sd * sd, -0.5 * n);
  KernelInit k;
  k.name = "gaussian";
  k.normalization = norm;
  k.center = mean;
  k.decay_radius = norm > 1e-12 ? sd * std::sqrt(2.0 * std::log(norm / 1e-12)) : 0.0;
  k.density = [mean, sd, norm](const Vector& x) {
    if (x.size() != mean.size()) throw InvalidArgument("gaussian kernel evaluated at a point of the wrong dimension");
    return norm * std::exp(-(x - mean).squaredNorm() / (2.0 * sd * sd));
  };
  return k;
}

namespace {

// Calls fn(point, index) for the midpoints of a cells^n lattice.
template <class Fn>
void for_each_midpoint(const DomainBox& box, std::size_t cells, Fn&& fn) {
  const auto n = box.dim();
  std::size_t total = 1;
  for (std::size_t d = 0; d < n; ++d) total *= cells;
  Vector p(static_cast<Eigen::Index>(n));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t d = 0; d < n; ++d) {
      const auto di = static_cast<Eigen::Index>(d);
      const double w = (box.hi[di] - box.lo[di]) / static_cast<double>(cells);
      p[di] = box.lo[di] + (static_cast<double>(rest % cells) + 0.5) * w;
      rest /= cells;
    }
    fn(p, idx);
  }
}

double cell_volume(const DomainBox& box, std::size_t cells) {
  double v = 1.0;
  for (Eigen::Index d = 0; d < box.lo.size(); ++d) v *= (box.hi[d] - box.lo[d]) / static_cast<double>(cells);
  return v;
}

}  // namespace

KernelInitCheck check_kernel_init(const KernelInit& k, const DomainBox& box, std::size_t cells_per_axis,
                                  double mass_tol) {
  if (cells_per_axis == 0) throw InvalidArgument("check_kernel_init: need at least one cell per axis");
  KernelInitCheck out;
  const double dv = cell_volume(box, cells_per_axis);
  for_each_midpoint(box, cells_per_axis, [&](const Vector& p, std::size_t) { out.mass += k(p) * dv; });

  const auto n = box.dim();
  const std::size_t per = cells_per_axis + 1;
  std::size_t total = 1;
  for (std::size_t d = 0; d < n; ++d) total *= per;
  Vector p(static_cast<Eigen::Index>(n));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    bool on_face = false;
    for (std::size_t d = 0; d < n; ++d) {
      const auto di = static_cast<Eigen::Index>(d);
      const std::size_t j = rest % per;
      rest /= per;
      on_face = on_face || j == 0 || j == per - 1;
      p[di] = box.lo[di] + (box.hi[di] - box.lo[di]) * static_cast<double>(j) / static_cast<double>(cells_per_axis);
    }
    if (on_face) out.boundary_max = std::max(out.boundary_max, k(p));
  }
  out.pass = std::abs(out.mass - 1.0) <= mass_tol && out.boundary_max < 1e-12;
  return out;
}

namespace {

const std::vector<double>& checked_dets(const JacobianState& j) {
  for (std::size_t i = 0; i < j.dets.size(); ++i) {
    if (!(std::abs(j.dets[i]) >= kDegenerateDet)) {
      throw DegenerateJacobian("det J fell below 1e-12 at node " + std::to_string(i));
    }
  }
  return j.dets;
}

}  // namespace

KernelSeries kernel_along_path(const KernelInit& k, const Scenario& s, const Vector& y, const NoiseRealization& noise) {
  auto run = simulate_jacobian(s, y, noise);
  KernelSeries out{std::move(run.path), checked_dets(run.jacobian), {}};
  const double rho0 = k(y);
  out.values.reserve(out.dets.size());
  for (double d : out.dets) out.values.push_back(rho0 / d);
  return out;
}

VolumeReport volume_invariance(const KernelInit& k, const Scenario& s, const NoiseRealization& noise,
                               std::size_t cells_per_axis, const DomainBox& region) {
  if (s.dim() > 2) throw InvalidArgument("volume_invariance: only n <= 2 is supported");
  if (region.dim() != s.dim()) throw InvalidArgument("volume_invariance: region dimension does not match scenario");
  if (cells_per_axis == 0) throw InvalidArgument("volume_invariance: need at least one cell per axis");

  std::vector<Vector> starts;
  for_each_midpoint(region, cells_per_axis, [&](const Vector& p, std::size_t) { starts.push_back(p); });
  std::vector<double> pushed(starts.size()), initial(starts.size());
  const double dv = cell_volume(region, cells_per_axis);
  parallel_for(starts.size(), [&](std::size_t c) {
    const auto series = kernel_along_path(k, s, starts[c], noise);
    pushed[c] = series.values.back() * series.dets.back() * dv;
    initial[c] = k(starts[c]) * dv;
  });

  VolumeReport out;
  out.cells = starts.size();
  for (std::size_t c = 0; c < starts.size(); ++c) {
    out.pushforward_sum += pushed[c];
    out.initial_sum += initial[c];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grid solver

double SpatialGrid::x(std::size_t i) const {
  if (i + 1 == nodes) return x_max;
  return x_min + static_cast<double>(i) * dx();
}

double trapezoid(std::span<const double> values, double dx) {
  if (values.size() < 2) return 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  return sum * dx;
}

double interpolate(const SpatialGrid& space, std::span<const double> values, double x) {
  if (!(x >= space.x_min && x <= space.x_max)) return 0.0;
  const double u = (x - space.x_min) / space.dx();
  auto i = static_cast<std::size_t>(u);
  if (i + 1 >= space.nodes) i = space.nodes - 2;
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

namespace {

void check_grid(const Scenario& s, const SpatialGrid& space) {
  if (s.dim() != 1) throw InvalidArgument("kernel grid solver needs a one-dimensional scenario");
  if (space.nodes < 3 || !(space.x_max > space.x_min)) throw InvalidArgument("kernel grid needs >= 3 nodes on x_min < x_max");
}

Vector point(double x) { return Vector::Constant(1, x); }

double mc_slope(double left, double right) {
  if (left * right <= 0.0) return 0.0;
  const double mag = std::min({2.0 * std::abs(left), 2.0 * std::abs(right), 0.5 * std::abs(left + right)});
  return left > 0.0 ? mag : -mag;
}

}  // namespace

double kernel_max_step(const Scenario& s, const SpatialGrid& space, double t) {
  check_grid(s, space);
  const double dx = space.dx();
  double max_b2 = 0.0;
  double max_a = 0.0;
  for (std::size_t i = 0; i < space.nodes; ++i) {
    const Vector x = point(space.x(i));
    max_b2 = std::max(max_b2, s.coeffs.diffusion(t, x).squaredNorm());
    max_a = std::max(max_a, std::abs(s.coeffs.drift(t, x)[0]));
    if (i + 1 < space.nodes) max_a = std::max(max_a, std::abs(s.coeffs.drift(t, point(space.x(i) + 0.5 * dx))[0]));
  }
  double h = std::numeric_limits<double>::infinity();
  if (max_b2 > 0.0) h = std::min(h, 0.4 * dx * dx / max_b2);
  if (max_a > 0.0) h = std::min(h, 0.4 * dx / max_a);
  return h;
}

KernelGridRun kernel_spde_solve(const KernelInit& k, const Scenario& s, const NoiseRealization& noise,
                                const SpatialGrid& space) {
  check_grid(s, space);
  const auto& grid = noise.grid();
  const std::size_t n = space.nodes;
  const std::size_t m = s.wiener_dim();
  if (noise.wiener_dim() != m) throw InvalidArgument("kernel_spde_solve: noise and scenario Wiener dimensions differ");
  const double dx = space.dx();
  const double h = grid.step();
  const auto& c = s.coeffs;

  KernelGridRun run{space, grid, {}, {}, 0.0, {}};
  run.states.reserve(grid.nodes());
  std::vector<double> rho(n);
  for (std::size_t i = 1; i + 1 < n; ++i) rho[i] = k(point(space.x(i)));
  run.min_value = *std::min_element(rho.begin(), rho.end());
  run.states.push_back({0, grid.t0(), rho});
  run.mass.push_back(trapezoid(rho, dx));

  std::vector<double> face_a(n - 1), slope(n, 0.0), flux(n - 1), next(n);
  Matrix b(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  bool warned = false;

  for (std::size_t step = 0; step < grid.steps(); ++step) {
    const double t = grid.time(step);
    const double h_max = kernel_max_step(s, space, t);
    if (h > h_max * (1.0 + 1e-12)) {
      const auto suggested = static_cast<std::size_t>(std::ceil((grid.t_end() - grid.t0()) / h_max));
      throw StepSizeError("kernel grid step " + std::to_string(h) + " exceeds the stable bound " +
                              std::to_string(h_max) + "; use at least " + std::to_string(suggested) + " steps",
                          suggested);
    }
    for (std::size_t i = 0; i < n; ++i) b.row(static_cast<Eigen::Index>(i)) = c.diffusion(t, point(space.x(i))).row(0);
    for (std::size_t f = 0; f + 1 < n; ++f) face_a[f] = c.drift(t, point(space.x(f) + 0.5 * dx))[0];
    for (std::size_t i = 1; i + 1 < n; ++i) slope[i] = mc_slope(rho[i] - rho[i - 1], rho[i + 1] - rho[i]);
    for (std::size_t f = 0; f + 1 < n; ++f) {
      flux[f] = face_a[f] >= 0.0 ? face_a[f] * (rho[f] + 0.5 * slope[f]) : face_a[f] * (rho[f + 1] - 0.5 * slope[f + 1]);
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double diffusion = 0.0;
      double transport = 0.0;
      for (std::size_t q = 0; q < m; ++q) {
        const auto qi = static_cast<Eigen::Index>(q);
        const auto ii = static_cast<Eigen::Index>(i);
        const double bm = b(ii - 1, qi), b0 = b(ii, qi), bp = b(ii + 1, qi);
        diffusion += (rho[i + 1] * bp * bp - 2.0 * rho[i] * b0 * b0 + rho[i - 1] * bm * bm) / (2.0 * dx * dx);
        transport += (rho[i + 1] * bp - rho[i - 1] * bm) / (2.0 * dx) * noise.increment(step, q);
      }
      next[i] = rho[i] + h * (-(flux[i] - flux[i - 1]) / dx + diffusion) - transport;
    }
    next[0] = next[n - 1] = 0.0;
    rho.swap(next);

    const double t_next = grid.time(step + 1);
    for (const auto& e : noise.events_in_step(step)) {
      const Mark& mark = noise.mark(e);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const auto pre = inverse_jump_map(s, t_next, point(space.x(i)), mark);
        next[i] = interpolate(space, rho, pre.y[0]) * std::abs(pre.det_inv);
      }
      next[0] = next[n - 1] = 0.0;
      rho.swap(next);
    }

    double lowest = 0.0;
    for (double v : rho) {
      if (!std::isfinite(v)) throw DivergedField("kernel grid solution is not finite", step);
      lowest = std::min(lowest, v);
    }
    run.min_value = std::min(run.min_value, lowest);
    if (lowest < -1e-6 && !warned) {
      warned = true;
      run.warnings.push_back("kernel grid value " + std::to_string(lowest) + " below -1e-6 at step " +
                             std::to_string(step) + "; the scheme may be unstable");
    }
    run.states.push_back({step + 1, t_next, rho});
    run.mass.push_back(trapezoid(rho, dx));
  }
  return run;
}

CharacteristicComparison compare_with_characteristics(const KernelGridRun& run, const KernelInit& k, const Scenario& s,
                                                      const NoiseRealization& noise, std::span<const double> starts) {
  if (!(run.grid == noise.grid())) throw InvalidArgument("grid run and noise live on different time grids");
  CharacteristicComparison out;
  for (double y : starts) {
    const auto series = kernel_along_path(k, s, point(y), noise);
    const double scale = *std::max_element(series.values.begin(), series.values.end());
    for (std::size_t node = 0; node < series.values.size(); ++node) {
      const double g = interpolate(run.space, run.states[node].values, series.path.states[node][0]);
      const double err = std::abs(g - series.values[node]);
      out.max_abs_error = std::max(out.max_abs_error, err);
      if (scale > 0.0) out.max_rel_error = std::max(out.max_rel_error, err / scale);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel ratios

RatioSeries kernel_ratio_integrals(std::span<const KernelInit> kernels, const Scenario& s, const Vector& y,
                                   const NoiseRealization& noise) {
  const std::size_t n = s.dim();
  if (kernels.size() != n + 1) throw InvalidArgument("kernel_ratio_integrals needs n + 1 kernels");
  const double den0 = kernels.back()(y);
  if (!(den0 > 0.0) || !std::isfinite(den0)) throw RatioUndefined("denominator kernel vanishes at the start point");

  auto run = simulate_jacobian(s, y, noise);
  const auto& dets = checked_dets(run.jacobian);
  RatioSeries out{std::move(run.path), Matrix(static_cast<Eigen::Index>(dets.size()), static_cast<Eigen::Index>(n)),
                  std::vector<double>(n, 0.0)};
  for (std::size_t node = 0; node < dets.size(); ++node) {
    const double den = den0 / dets[node];
    for (std::size_t l = 0; l < n; ++l) {
      const double theta = (kernels[l](y) / dets[node]) / den;
      out.ratios(static_cast<Eigen::Index>(node), static_cast<Eigen::Index>(l)) = theta;
      out.max_deviation[l] =
          std::max(out.max_deviation[l], std::abs(theta - out.ratios(0, static_cast<Eigen::Index>(l))));
    }
  }
  return out;
}

GridRatioReport grid_kernel_ratio(const KernelInit& numerator, const KernelInit& denominator, const Scenario& s,
                                  double y, const NoiseRealization& noise, const SpatialGrid& space) {
  const auto num = kernel_spde_solve(numerator, s, noise, space);
  const auto den = kernel_spde_solve(denominator, s, noise, space);
  const Path path = simulate_path(s, point(y), noise);

  GridRatioReport out;
  for (std::size_t node = 0; node < path.states.size(); ++node) {
    const double x = path.states[node][0];
    const double d = interpolate(space, den.states[node].values, x);
    if (!(d >= 1e-12)) {
      throw RatioUndefined("denominator kernel fell below 1e-12 at node " + std::to_string(node));
    }
    const double r = interpolate(space, num.states[node].values, x) / d;
    out.times.push_back(path.grid.time(node));
    out.points.push_back(x);
    out.ratios.push_back(r);
  }
  out.initial = out.ratios.front();
  for (double r : out.ratios) out.max_deviation = std::max(out.max_deviation, std::abs(r - out.initial));
  return out;
}

}  // namespace jumpsde
