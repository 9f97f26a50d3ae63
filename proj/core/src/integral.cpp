#include "jumpsde/integral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jumpsde/errors.hpp"
#include "jumpsde/parallel.hpp"

namespace jumpsde {

namespace {

FirstIntegralCandidate constant(std::size_t n) {
  const auto d = static_cast<Eigen::Index>(n);
  FirstIntegralCandidate c;
  c.name = "const";
  c.u.value = [](double, const Vector&) { return 1.0; };
  c.u.time_derivative = [](double, const Vector&) { return 0.0; };
  c.u.gradient = [d](double, const Vector&) { return Vector::Zero(d).eval(); };
  c.u.hessian = [d](double, const Vector&) { return Matrix::Zero(d, d).eval(); };
  return c;
}

FirstIntegralCandidate identity(std::size_t n) {
  const auto d = static_cast<Eigen::Index>(n);
  FirstIntegralCandidate c;
  c.name = "identity";
  c.u.value = [](double, const Vector& x) { return x[0]; };
  c.u.time_derivative = [](double, const Vector&) { return 0.0; };
  c.u.gradient = [d](double, const Vector&) {
    Vector g = Vector::Zero(d);
    g[0] = 1.0;
    return g;
  };
  c.u.hessian = [d](double, const Vector&) { return Matrix::Zero(d, d).eval(); };
  return c;
}

FirstIntegralCandidate radius2(std::size_t n) {
  const auto d = static_cast<Eigen::Index>(n);
  FirstIntegralCandidate c;
  c.name = "radius2";
  c.u.value = [](double, const Vector& x) { return x.squaredNorm(); };
  c.u.time_derivative = [](double, const Vector&) { return 0.0; };
  c.u.gradient = [](double, const Vector& x) { return (2.0 * x).eval(); };
  c.u.hessian = [d](double, const Vector&) { return (2.0 * Matrix::Identity(d, d)).eval(); };
  return c;
}

FirstIntegralCandidate x1_squared(std::size_t n) {
  const auto d = static_cast<Eigen::Index>(n);
  FirstIntegralCandidate c;
  c.name = "x1-squared";
  c.u.value = [](double, const Vector& x) { return x[0] * x[0]; };
  c.u.time_derivative = [](double, const Vector&) { return 0.0; };
  c.u.gradient = [d](double, const Vector& x) {
    Vector g = Vector::Zero(d);
    g[0] = 2.0 * x[0];
    return g;
  };
  c.u.hessian = [d](double, const Vector&) {
    Matrix hm = Matrix::Zero(d, d);
    hm(0, 0) = 2.0;
    return hm;
  };
  return c;
}

FirstIntegralCandidate x_minus_t(std::size_t n) {
  FirstIntegralCandidate c = identity(n);
  c.name = "x-minus-t";
  c.u.value = [](double t, const Vector& x) { return x[0] - t; };
  c.u.time_derivative = [](double, const Vector&) { return -1.0; };
  return c;
}

struct CandidateEntry {
  std::string_view name;
  FirstIntegralCandidate (*build)(std::size_t);
};

constexpr CandidateEntry kCandidates[] = {
    {"const", &constant}, {"identity", &identity}, {"radius2", &radius2}, {"x-minus-t", &x_minus_t},
    {"x1-squared", &x1_squared}};

}  // namespace

FirstIntegralCandidate get_candidate(std::string_view name, std::size_t n) {
  if (n == 0) throw InvalidArgument("candidate dimension must be positive");
  for (const auto& e : kCandidates) {
    if (e.name == name) return e.build(n);
  }
  std::ostringstream msg;
  msg << "unknown first-integral candidate '" << name << "'; available:";
  for (const auto& e : kCandidates) msg << ' ' << e.name;
  throw NotFound(msg.str());
}

std::vector<std::string> candidate_names() {
  std::vector<std::string> out;
  for (const auto& e : kCandidates) out.emplace_back(e.name);
  return out;
}

std::vector<LatticePoint> condition_lattice(const DomainBox& box, std::size_t per_axis, std::span<const double> times) {
  std::vector<LatticePoint> out;
  const auto xs = box_lattice(box, per_axis);
  for (double t : times) {
    for (const auto& x : xs) out.push_back({t, x});
  }
  return out;
}

double candidate_derivative_error(const FirstIntegralCandidate& c, std::span<const LatticePoint> points) {
  SmoothScalarField fd;
  fd.value = c.u.value;
  double err = 0.0;
  for (const auto& p : points) {
    err = std::max(err, std::abs(c.u.dt(p.t, p.x) - fd.dt(p.t, p.x)));
    err = std::max(err, (c.u.grad(p.t, p.x) - fd.grad(p.t, p.x)).lpNorm<Eigen::Infinity>());
    err = std::max(err, (c.u.hess(p.t, p.x) - fd.hess(p.t, p.x)).lpNorm<Eigen::Infinity>());
  }
  return err;
}

const ConditionResidual& ConditionsReport::get(std::string_view name) const {
  for (const auto& r : residuals) {
    if (r.name == name) return r;
  }
  throw NotFound("no residual named '" + std::string(name) + "'");
}

std::vector<std::string> ConditionsReport::failing() const {
  std::vector<std::string> out;
  for (const auto& r : residuals) {
    if (!(r.sup <= tolerance)) out.push_back(r.name);
  }
  return out;
}

namespace {

void raise(ConditionResidual& r, double v, const LatticePoint& p) {
  if (v > r.sup || std::isnan(v)) {
    r.sup = v;
    r.at = p;
  }
}

}  // namespace

ConditionsReport check_conditions(const FirstIntegralCandidate& c, const Scenario& s,
                                  std::span<const LatticePoint> lattice, double tol) {
  const std::size_t m = s.wiener_dim();
  const auto& co = s.coeffs;
  ConditionsReport report;
  report.tolerance = tol;
  for (std::size_t k = 0; k < m; ++k) report.residuals.push_back({m == 1 ? "R1" : "R1_" + std::to_string(k), 0.0, {}});
  report.residuals.push_back({"R2", 0.0, {}});
  report.residuals.push_back({"R3", 0.0, {}});
  auto& r2 = report.residuals[m];
  auto& r3 = report.residuals[m + 1];

  for (const auto& p : lattice) {
    const Vector grad = c.u.grad(p.t, p.x);
    const Matrix b = co.diffusion(p.t, p.x);
    const auto db = co.diffusion_derivative(p.t, p.x);
    Vector effective = co.drift(p.t, p.x);
    for (std::size_t k = 0; k < m; ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      raise(report.residuals[k], std::abs(b.col(ki).dot(grad)), p);
      effective -= 0.5 * db[k] * b.col(ki);
    }
    raise(r2, std::abs(c.u.dt(p.t, p.x) + grad.dot(effective)), p);

    const double u0 = c.u(p.t, p.x);
    for (const auto& mark : s.marks.marks) {
      const Vector post = p.x + co.jump(p.t, p.x, mark);
      const double forward = std::abs(u0 - c.u(p.t, post));
      raise(r3, forward, p);
      try {
        const auto pre = inverse_jump_map(s, p.t, post, mark);
        const double backward = std::abs(c.u(p.t, pre.y) - c.u(p.t, post));
        report.preimage_gap = std::max(report.preimage_gap, std::abs(forward - backward));
      } catch (const Error&) {
        report.preimage_gap = std::numeric_limits<double>::infinity();
      }
    }
  }
  report.pass = report.failing().empty();
  return report;
}

IncrementSeries eq35_residual_series(const FirstIntegralCandidate& c, const Scenario& s, const Path& path,
                                     const NoiseRealization& noise) {
  if (!(path.grid == noise.grid())) throw InvalidArgument("path and noise live on different time grids");
  const auto& grid = noise.grid();
  const auto& co = s.coeffs;
  const double h = grid.step();

  IncrementSeries out{grid, {}, {}, {}, 0.0, 0.0};
  double value = c.u(grid.t0(), path.states.front());
  out.values.push_back(value);
  std::size_t ev = 0;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const Vector& x = path.states[k];
    const Vector grad = c.u.grad(t, x);
    const Matrix hess = c.u.hess(t, x);
    const Matrix b = co.diffusion(t, x);
    const auto db = co.diffusion_derivative(t, x);

    double curvature = 0.0;
    double nested = 0.0;  // Σ_k b_ik ∂_i(b_jk ∂_j u) = Σ_k [∇u·(∂b_k b_k) + b_kᵀ ∇²u b_k]
    double noise_sum = 0.0;
    for (Eigen::Index q = 0; q < b.cols(); ++q) {
      const double bhb = b.col(q).dot(hess * b.col(q));
      curvature += bhb;
      nested += grad.dot(db[static_cast<std::size_t>(q)] * b.col(q)) + bhb;
      noise_sum -= b.col(q).dot(grad) * noise.increment(k, static_cast<std::size_t>(q));
    }
    double inc = (-co.drift(t, x).dot(grad) + 0.5 * curvature - nested) * h + noise_sum;
    for (; ev < path.applied_events.size() && path.applied_events[ev].step == k; ++ev) {
      const auto& e = path.applied_events[ev];
      const Mark& mark = noise.marks().marks[e.mark_index];
      const auto pre = inverse_jump_map(s, e.time, e.pre, mark);
      inc += c.u(e.time, pre.y) - c.u(e.time, e.pre);
    }
    value += inc;
    out.increments.push_back(inc);
    out.cumulative.push_back(out.cumulative.empty() ? inc : out.cumulative.back() + inc);
    out.values.push_back(value);
  }
  out.direct_change = c.u(grid.t_end(), path.terminal()) - c.u(grid.t0(), path.states.front());
  out.discrepancy = std::abs(out.cumulative.back() - out.direct_change);
  return out;
}

double conservation_deviation(const FirstIntegralCandidate& c, const Path& path) {
  const double u0 = c.u(path.grid.t0(), path.states.front());
  double dev = 0.0;
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    dev = std::max(dev, std::abs(c.u(path.grid.time(k), path.states[k]) - u0));
  }
  return dev;
}

namespace {

void summarize(OracleStats& st) {
  double sum = 0.0;
  std::size_t alive = 0;
  st.diverged = 0;
  st.max = 0.0;
  for (double d : st.per_path) {
    if (std::isnan(d)) {
      ++st.diverged;
      continue;
    }
    sum += d;
    ++alive;
    st.max = std::max(st.max, d);
  }
  st.paths = st.per_path.size();
  st.mean = alive > 0 ? sum / static_cast<double>(alive) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

OracleStats conservation_oracle(const FirstIntegralCandidate& c, const Scenario& s, const Vector& x0,
                                const TimeGrid& grid, std::size_t n_paths, std::uint64_t base_seed) {
  OracleStats st;
  st.per_path.assign(n_paths, 0.0);
  parallel_for(n_paths, [&](std::size_t i) {
    const auto noise = sample_noise(grid, s.wiener_dim(), s.marks, base_seed + i);
    try {
      st.per_path[i] = conservation_deviation(c, simulate_path(s, x0, noise));
    } catch (const DivergedPath&) {
      st.per_path[i] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  summarize(st);
  return st;
}

ConservationStudy conservation_study(const FirstIntegralCandidate& c, const Scenario& s, const Vector& x0,
                                     const TimeGrid& coarse, std::size_t levels, std::size_t n_paths,
                                     std::uint64_t base_seed) {
  if (levels == 0) throw InvalidArgument("conservation_study needs at least one level");
  ConservationStudy study;
  study.levels.assign(levels, OracleStats{});
  for (auto& l : study.levels) l.per_path.assign(n_paths, 0.0);
  double h = coarse.step();
  for (std::size_t l = 0; l < levels; ++l, h /= 2.0) study.steps.push_back(h);

  parallel_for(n_paths, [&](std::size_t i) {
    const auto chain = refine_chain(sample_noise(coarse, s.wiener_dim(), s.marks, base_seed + i), levels);
    std::vector<double> dev(levels);
    try {
      for (std::size_t l = 0; l < levels; ++l) dev[l] = conservation_deviation(c, simulate_path(s, x0, chain[l]));
    } catch (const DivergedPath&) {
      dev.assign(levels, std::numeric_limits<double>::quiet_NaN());
    }
    for (std::size_t l = 0; l < levels; ++l) study.levels[l].per_path[i] = dev[l];
  });
  std::vector<double> means;
  for (auto& l : study.levels) {
    summarize(l);
    means.push_back(l.mean);
  }
  if (levels >= 2 && std::all_of(means.begin(), means.end(), [](double v) { return v > 0.0 && std::isfinite(v); })) {
    study.fit = fit_log2_slope(study.steps, means);
  }
  return study;
}

}  // namespace jumpsde
