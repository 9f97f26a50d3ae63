#include "jumpsde/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jumpsde/errors.hpp"
#include "jumpsde/jacobian.hpp"

namespace jumpsde {

// ---------------------------------------------------------------------------
// SmoothScalarField

double SmoothScalarField::dt(double t, const Vector& x) const {
  if (time_derivative) return time_derivative(t, x);
  const double d = 1e-5 * std::max(1.0, std::abs(t));
  return (value(t + d, x) - value(t - d, x)) / (2.0 * d);
}

Vector SmoothScalarField::grad(double t, const Vector& x) const {
  if (gradient) return gradient(t, x);
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    g[i] = fd_derivative([&](const Vector& y) { return value(t, y); }, x, static_cast<std::size_t>(i), fd_step(x[i]));
  }
  return g;
}

Matrix SmoothScalarField::hess(double t, const Vector& x) const {
  if (hessian) return hessian(t, x);
  const Eigen::Index n = x.size();
  Matrix hm(n, n);
  if (gradient) {
    hm = fd_jacobian([&](const Vector& y) { return gradient(t, y); }, x);
    return (0.5 * (hm + hm.transpose())).eval();
  }
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = 1e-4 * std::max(1.0, std::abs(x[i]));
  const double f0 = value(t, x);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector xp = x;
    Vector xm = x;
    xp[i] += d[i];
    xm[i] -= d[i];
    hm(i, i) = (value(t, xp) - 2.0 * f0 + value(t, xm)) / (d[i] * d[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Vector pp = x, pm = x, mp = x, mm = x;
      pp[i] += d[i], pp[j] += d[j];
      pm[i] += d[i], pm[j] -= d[j];
      mp[i] -= d[i], mp[j] += d[j];
      mm[i] -= d[i], mm[j] -= d[j];
      hm(i, j) = hm(j, i) = (value(t, pp) - value(t, pm) - value(t, mp) + value(t, mm)) / (4.0 * d[i] * d[j]);
    }
  }
  return hm;
}

namespace {

// Shared by the Itô and Itô–Wentzell evaluators so the Π = D = G = 0 reduction is bit-exact.
double first_order(const Vector& a, const Vector& grad) { return a.dot(grad); }

double second_order(const Matrix& b, const Matrix& hess) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < b.cols(); ++k) sum += b.col(k).dot(hess * b.col(k));
  return 0.5 * sum;
}

void push_increment(IncrementSeries& s, double inc) {
  s.increments.push_back(inc);
  s.cumulative.push_back(s.cumulative.empty() ? inc : s.cumulative.back() + inc);
}

void check_path_noise(const Path& path, const NoiseRealization& noise) {
  if (!(path.grid == noise.grid())) throw InvalidArgument("path and noise live on different time grids");
  if (path.states.size() != noise.grid().nodes()) throw InvalidArgument("path length does not match its grid");
}

}  // namespace

IncrementSeries ito_series(const SmoothScalarField& f, const Scenario& s, const Path& path, const NoiseRealization& noise) {
  check_path_noise(path, noise);
  const auto& grid = noise.grid();
  const double h = grid.step();
  const auto& c = s.coeffs;

  IncrementSeries out{grid, {}, {}, {}, 0.0, 0.0};
  out.increments.reserve(grid.steps());
  out.cumulative.reserve(grid.steps());
  out.values.reserve(grid.nodes());
  double value = f(grid.t0(), path.states.front());
  out.values.push_back(value);

  std::size_t ev = 0;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const Vector& x = path.states[k];
    const Vector grad = f.grad(t, x);
    const Matrix b = c.diffusion(t, x);
    const double drift = f.dt(t, x) + first_order(c.drift(t, x), grad) + second_order(b, f.hess(t, x));
    double noise_sum = 0.0;
    for (std::size_t q = 0; q < s.wiener_dim(); ++q) {
      noise_sum += b.col(static_cast<Eigen::Index>(q)).dot(grad) * noise.increment(k, q);
    }
    double inc = drift * h + noise_sum;
    value = value + inc;

    const double t_next = grid.time(k + 1);
    for (; ev < path.applied_events.size() && path.applied_events[ev].step == k; ++ev) {
      const auto& e = path.applied_events[ev];
      const double jump = f(t_next, e.post) - f(t_next, e.pre);
      inc += jump;
      value = value + jump;
    }
    push_increment(out, inc);
    out.values.push_back(value);
  }
  out.direct_change = f(grid.t_end(), path.terminal()) - f(grid.t0(), path.states.front());
  out.discrepancy = std::abs(out.cumulative.back() - out.direct_change);
  return out;
}

// ---------------------------------------------------------------------------
// Jump preimages

JumpPreimage inverse_jump_map(const Scenario& s, double t, const Vector& x, const Mark& mark, double tol) {
  const auto& c = s.coeffs;
  const auto n = static_cast<Eigen::Index>(s.dim());
  Vector y = x - c.jump(t, x, mark);
  for (std::size_t it = 1; it <= kMaxInversionIterations; ++it) {
    const Vector r = y + c.jump(t, y, mark) - x;
    const Matrix jm = Matrix::Identity(n, n) + c.jump_derivative(t, y, mark);
    const double det = determinant(jm);
    if (!(std::abs(det) >= kSingularJumpDet)) {
      throw SingularJump("jump map I + ∂g/∂y is singular near the preimage");
    }
    if (r.lpNorm<Eigen::Infinity>() <= tol) return {y, 1.0 / det, it};
    y -= Eigen::PartialPivLU<Matrix>(jm).solve(r);
    if (!y.allFinite()) break;
  }
  throw InversionFailure("jump map inversion did not converge in " + std::to_string(kMaxInversionIterations) +
                         " iterations");
}

double jump_term_forward(const PointFunction& z, const Scenario& s, double t, const Vector& x, const Mark& mark) {
  return z(x + s.coeffs.jump(t, x, mark)) - z(x);
}

double jump_term_preimage(const PointFunction& z, const Scenario& s, double t, const Vector& x_post, const Mark& mark,
                          double tol) {
  const auto pre = inverse_jump_map(s, t, x_post, mark, tol);
  return z(x_post) - z(x_post - s.coeffs.jump(t, pre.y, mark));
}

// ---------------------------------------------------------------------------
// Field registry

namespace {

FieldSetup rot2d_mixed(std::size_t n, std::size_t m) {
  if (n != 2 || m < 1) throw InvalidArgument("field 'rot2d-mixed' needs n = 2, m >= 1");
  FieldSetup f;
  f.name = "rot2d-mixed";
  f.initial.value = [](double, const Vector& x) { return x[0] * x[0] + x[1]; };
  f.initial.time_derivative = [](double, const Vector&) { return 0.0; };
  f.initial.gradient = [](double, const Vector& x) {
    Vector g(2);
    g << 2.0 * x[0], 1.0;
    return g;
  };
  f.initial.hessian = [](double, const Vector&) {
    Matrix hm = Matrix::Zero(2, 2);
    hm(0, 0) = 2.0;
    return hm;
  };
  auto& p = f.process;
  p.n = n;
  p.m = m;
  p.drift = [](double, const Vector&) { return 0.0; };
  p.diffusion = [m](double, const Vector& x) {
    Vector d = Vector::Zero(static_cast<Eigen::Index>(m));
    d[0] = x[1];
    return d;
  };
  p.diffusion_gradient = [m](double, const Vector&) {
    Matrix g = Matrix::Zero(static_cast<Eigen::Index>(m), 2);
    g(0, 1) = 1.0;
    return g;
  };
  p.jump = [](double, const Vector& x, const Mark&) { return 0.1 * x[0]; };
  p.time_homogeneous = true;
  return f;
}

SmoothScalarField first_coordinate(std::size_t n) {
  const auto d = static_cast<Eigen::Index>(n);
  SmoothScalarField f;
  f.value = [](double, const Vector& x) { return x[0]; };
  f.time_derivative = [](double, const Vector&) { return 0.0; };
  f.gradient = [d](double, const Vector&) {
    Vector g = Vector::Zero(d);
    g[0] = 1.0;
    return g;
  };
  f.hessian = [d](double, const Vector&) { return Matrix::Zero(d, d).eval(); };
  return f;
}

FieldSetup additive_x1(std::size_t n, std::size_t m) {
  if (n < 1 || m < 1) throw InvalidArgument("field 'additive-x1' needs n >= 1, m >= 1");
  FieldSetup f;
  f.name = "additive-x1";
  f.initial = first_coordinate(n);
  f.process = static_field_process(n, m);
  f.process.diffusion = [m](double, const Vector&) {
    Vector d = Vector::Zero(static_cast<Eigen::Index>(m));
    d[0] = 1.0;
    return d;
  };
  return f;
}

FieldSetup unit_drift(std::size_t n, std::size_t m) {
  if (n < 1) throw InvalidArgument("field 'unit-drift' needs n >= 1");
  FieldSetup f;
  f.name = "unit-drift";
  f.initial = first_coordinate(n);
  f.process = static_field_process(n, m);
  f.process.drift = [](double, const Vector&) { return 1.0; };
  return f;
}

// Σ sin x_i + ½|x|² (+ x_1 x_2 when n >= 2): nonzero gradient, curvature and cross terms.
FieldSetup static_smooth(std::size_t n, std::size_t m) {
  if (n < 1) throw InvalidArgument("field 'static-smooth' needs n >= 1");
  FieldSetup f;
  f.name = "static-smooth";
  f.initial.value = [](double, const Vector& x) {
    double v = 0.5 * x.squaredNorm();
    for (Eigen::Index i = 0; i < x.size(); ++i) v += std::sin(x[i]);
    if (x.size() >= 2) v += x[0] * x[1];
    return v;
  };
  f.initial.time_derivative = [](double, const Vector&) { return 0.0; };
  f.initial.gradient = [](double, const Vector& x) {
    Vector g = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] += std::cos(x[i]);
    if (x.size() >= 2) {
      g[0] += x[1];
      g[1] += x[0];
    }
    return g;
  };
  f.initial.hessian = [](double, const Vector& x) {
    Matrix hm = Matrix::Identity(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) hm(i, i) -= std::sin(x[i]);
    if (x.size() >= 2) hm(0, 1) = hm(1, 0) = 1.0;
    return hm;
  };
  f.process = static_field_process(n, m);
  return f;
}

FieldSetup static_x1sq(std::size_t n, std::size_t m) {
  if (n < 1) throw InvalidArgument("field 'static-x1sq' needs n >= 1");
  const auto d = static_cast<Eigen::Index>(n);
  FieldSetup f;
  f.name = "static-x1sq";
  f.initial.value = [](double, const Vector& x) { return x[0] * x[0]; };
  f.initial.time_derivative = [](double, const Vector&) { return 0.0; };
  f.initial.gradient = [d](double, const Vector& x) {
    Vector g = Vector::Zero(d);
    g[0] = 2.0 * x[0];
    return g;
  };
  f.initial.hessian = [d](double, const Vector&) {
    Matrix hm = Matrix::Zero(d, d);
    hm(0, 0) = 2.0;
    return hm;
  };
  f.process = static_field_process(n, m);
  return f;
}

struct FieldEntry {
  std::string_view name;
  FieldSetup (*build)(std::size_t, std::size_t);
};

const std::vector<FieldEntry>& field_registry() {
  static const std::vector<FieldEntry> entries = {
      {"additive-x1", &additive_x1}, {"rot2d-mixed", &rot2d_mixed}, {"static-smooth", &static_smooth},
      {"static-x1sq", &static_x1sq}, {"unit-drift", &unit_drift},
  };
  return entries;
}

}  // namespace

std::vector<std::string> field_setup_names() {
  std::vector<std::string> out;
  for (const auto& e : field_registry()) out.emplace_back(e.name);
  return out;
}

FieldSetup get_field_setup(std::string_view name, std::size_t n, std::size_t m) {
  for (const auto& e : field_registry()) {
    if (e.name == name) return e.build(n, m);
  }
  std::ostringstream msg;
  msg << "unknown field process '" << name << "'; available:";
  for (const auto& e : field_registry()) msg << ' ' << e.name;
  throw NotFound(msg.str());
}

// ---------------------------------------------------------------------------
// Itô–Wentzell

double stencil_step(double xi) noexcept { return 1e-3 * std::max(1.0, std::abs(xi)); }

namespace {

struct IncrementDerivatives {
  Vector grad;
  Matrix hess;
};

// 5-point first and second derivatives per axis; 4-corner mixed derivatives.
IncrementDerivatives stencil_derivatives(const FieldIncrements& zeta, const DomainBox& box, const Vector& x,
                                         std::size_t node, std::size_t events) {
  const Eigen::Index n = x.size();
  auto eval = [&](const Vector& p) {
    if (!box.contains(p)) throw DomainExit("Itô–Wentzell stencil left the domain box");
    return zeta.value(p, node, events);
  };
  IncrementDerivatives out{Vector(n), Matrix(n, n)};
  const double f0 = eval(x);
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = stencil_step(x[i]);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector p = x;
    p[i] = x[i] + 2.0 * d[i];
    const double fp2 = eval(p);
    p[i] = x[i] + d[i];
    const double fp1 = eval(p);
    p[i] = x[i] - d[i];
    const double fm1 = eval(p);
    p[i] = x[i] - 2.0 * d[i];
    const double fm2 = eval(p);
    out.grad[i] = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * d[i]);
    out.hess(i, i) = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * d[i] * d[i]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Vector pp = x, pm = x, mp = x, mm = x;
      pp[i] += d[i], pp[j] += d[j];
      pm[i] += d[i], pm[j] -= d[j];
      mp[i] -= d[i], mp[j] += d[j];
      mm[i] -= d[i], mm[j] -= d[j];
      out.hess(i, j) = out.hess(j, i) = (eval(pp) - eval(pm) - eval(mp) + eval(mm)) / (4.0 * d[i] * d[j]);
    }
  }
  return out;
}

class CompositeObserver final : public PathObserver {
 public:
  CompositeObserver(const FieldSetup& z, const Scenario& s, const NoiseRealization& noise, IncrementSeries& out)
      : z_(z), s_(s), noise_(noise), zeta_(z.process, noise), out_(out) {}

  double field(const Vector& x, std::size_t node, std::size_t events) const {
    return z_.initial(noise_.grid().t0(), x) + zeta_.value(x, node, events);
  }

  void start(const Vector& x0) {
    value_ = field(x0, 0, 0);
    out_.values.push_back(value_);
  }

  void on_step(std::size_t k, double t, const Vector& x) override {
    if (k > 0) finish_step();
    const auto& p = z_.process;
    const auto& c = s_.coeffs;
    const std::size_t events = noise_.events_before_step(k);
    const auto dz = stencil_derivatives(zeta_, s_.box, x, k, events);
    const double t0 = noise_.grid().t0();
    const Vector grad = z_.initial.grad(t0, x) + dz.grad;
    const Matrix hess = z_.initial.hess(t0, x) + dz.hess;
    const Matrix b = c.diffusion(t, x);
    const Vector d = p.diffusion(t, x);
    const Matrix dd = p.diffusion_derivative(t, x);

    double cross = 0.0;
    for (Eigen::Index q = 0; q < b.cols(); ++q) cross += b.col(q).dot(dd.row(q).transpose());
    const double drift = p.drift(t, x) + first_order(c.drift(t, x), grad) + cross + second_order(b, hess);
    double noise_sum = 0.0;
    for (std::size_t q = 0; q < s_.wiener_dim(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      noise_sum += (d[qi] + b.col(qi).dot(grad)) * noise_.increment(k, q);
    }
    inc_ = drift * noise_.grid().step() + noise_sum;
    value_ = value_ + inc_;
    applied_ = events;
  }

  void on_jump(const AppliedEvent& e) override {
    const std::size_t node = e.step + 1;
    const Mark& mark = noise_.marks().marks[e.mark_index];
    const double jump =
        z_.process.jump(e.time, e.post, mark) + (field(e.post, node, applied_) - field(e.pre, node, applied_));
    ++applied_;
    inc_ += jump;
    value_ = value_ + jump;
  }

  void finish_step() {
    push_increment(out_, inc_);
    out_.values.push_back(value_);
  }

 private:
  const FieldSetup& z_;
  const Scenario& s_;
  const NoiseRealization& noise_;
  FieldIncrements zeta_;
  IncrementSeries& out_;
  double value_ = 0.0;
  double inc_ = 0.0;
  std::size_t applied_ = 0;
};

}  // namespace

CompositeRun ito_wentzel_series(const FieldSetup& z, const Scenario& s, const Vector& x0, const NoiseRealization& noise) {
  if (z.process.n != s.dim() || z.process.m != s.wiener_dim()) {
    throw InvalidArgument("field process '" + z.name + "' does not match scenario '" + s.name + "' dimensions");
  }
  const auto& grid = noise.grid();
  IncrementSeries series{grid, {}, {}, {}, 0.0, 0.0};
  series.increments.reserve(grid.steps());
  series.cumulative.reserve(grid.steps());
  series.values.reserve(grid.nodes());

  CompositeObserver observer(z, s, noise, series);
  observer.start(x0);
  Path path = simulate_path(s, x0, noise, observer);
  observer.finish_step();

  series.direct_change = observer.field(path.terminal(), grid.steps(), noise.events().size()) - series.values.front();
  series.discrepancy = std::abs(series.cumulative.back() - series.direct_change);
  return {std::move(path), std::move(series)};
}

ConsistencyReport composite_consistency(const FieldSetup& z, const Scenario& s, const Vector& x0,
                                        const NoiseRealization& noise) {
  auto run = ito_wentzel_series(z, s, x0, noise);
  const auto& grid = noise.grid();
  const FieldIncrements zeta(z.process, noise);

  ConsistencyReport report{std::move(run.path), std::move(run.series), {}, 0.0};
  report.node_differences.reserve(grid.nodes());
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    const Vector& x = report.path.states[k];
    const double field = z.initial(grid.t0(), x) + zeta.value(x, k, noise.events_before_step(k));
    report.node_differences.push_back(std::abs(report.composite.values[k] - field));
  }

  const std::vector<Vector> terminal{report.path.terminal()};
  const auto trace = evolve_scalar_field(
      z.process, [&](const Vector& x) { return z.initial(grid.t0(), x); }, terminal, noise);
  report.terminal_difference = std::abs(report.composite.terminal() - trace.values(trace.values.rows() - 1, 0));
  return report;
}

}  // namespace jumpsde
