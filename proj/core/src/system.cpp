#include "jumpsde/system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "jumpsde/errors.hpp"

namespace jumpsde {

double fd_step(double xj) noexcept { return 1e-5 * std::max(1.0, std::abs(xj)); }

double fd_derivative(const std::function<double(const Vector&)>& f, const Vector& x, std::size_t j, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("fd_derivative: step must be positive");
  if (j >= static_cast<std::size_t>(x.size())) throw InvalidArgument("fd_derivative: direction out of range");
  Vector xp = x;
  Vector xm = x;
  xp[static_cast<Eigen::Index>(j)] += delta;
  xm[static_cast<Eigen::Index>(j)] -= delta;
  return (f(xp) - f(xm)) / (2.0 * delta);
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x) {
  const Eigen::Index n = x.size();
  Matrix jac;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = fd_step(x[j]);
    Vector xp = x;
    Vector xm = x;
    xp[j] += d;
    xm[j] -= d;
    const Vector col = (f(xp) - f(xm)) / (2.0 * d);
    if (j == 0) jac.resize(col.size(), n);
    jac.col(j) = col;
  }
  return jac;
}

Matrix CoefficientField::drift_derivative(double t, const Vector& x) const {
  if (drift_jacobian) return drift_jacobian(t, x);
  return fd_jacobian([&](const Vector& y) { return drift(t, y); }, x);
}

std::vector<Matrix> CoefficientField::diffusion_derivative(double t, const Vector& x) const {
  if (diffusion_jacobian) return diffusion_jacobian(t, x);
  std::vector<Matrix> out;
  out.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    out.push_back(fd_jacobian([&](const Vector& y) -> Vector { return diffusion(t, y).col(col); }, x));
  }
  return out;
}

Matrix CoefficientField::jump_derivative(double t, const Vector& x, const Mark& mark) const {
  if (jump_jacobian) return jump_jacobian(t, x, mark);
  return fd_jacobian([&](const Vector& y) { return jump(t, y, mark); }, x);
}

bool DomainBox::contains(const Vector& x) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
  }
  return true;
}

Matrix ScalarFieldProcess::diffusion_derivative(double t, const Vector& x) const {
  if (diffusion_gradient) return diffusion_gradient(t, x);
  // fd_jacobian returns (k, i) = ∂D_k/∂x_i directly.
  return fd_jacobian([&](const Vector& y) { return diffusion(t, y); }, x);
}

ScalarFieldProcess static_field_process(std::size_t n, std::size_t m) {
  ScalarFieldProcess p;
  p.n = n;
  p.m = m;
  p.drift = [](double, const Vector&) { return 0.0; };
  p.diffusion = [m](double, const Vector&) { return Vector::Zero(static_cast<Eigen::Index>(m)).eval(); };
  p.jump = [](double, const Vector&, const Mark&) { return 0.0; };
  p.diffusion_gradient = [n, m](double, const Vector&) {
    return Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)).eval();
  };
  p.time_homogeneous = true;
  return p;
}

// ---------------------------------------------------------------------------
// Registry

namespace {

Mark scalar_mark(double v) { return Mark::Constant(1, v); }

DomainBox cube(std::size_t n, double half) {
  const auto d = static_cast<Eigen::Index>(n);
  return {Vector::Constant(d, -half), Vector::Constant(d, half)};
}

MarkSpace single_mark(double value, double rate) {
  MarkSpace ms;
  if (rate > 0.0) {
    ms.marks.push_back(scalar_mark(value));
    ms.rates.push_back(rate);
  }
  return ms;
}

// Zero jump and derivative helpers shared by continuous scenarios.
JumpFn zero_jump(std::size_t n) {
  return [n](double, const Vector&, const Mark&) { return Vector::Zero(static_cast<Eigen::Index>(n)).eval(); };
}
JumpJacobianFn zero_jump_jacobian(std::size_t n) {
  return [n](double, const Vector&, const Mark&) {
    const auto d = static_cast<Eigen::Index>(n);
    return Matrix::Zero(d, d).eval();
  };
}
DiffusionJacobianFn constant_diffusion_jacobian(std::size_t n, std::size_t m) {
  return [n, m](double, const Vector&) {
    const auto d = static_cast<Eigen::Index>(n);
    return std::vector<Matrix>(m, Matrix::Zero(d, d));
  };
}

Scenario make_freeze(const ScenarioParams&) {
  Scenario s;
  s.coeffs.n = 1;
  s.coeffs.m = 1;
  s.coeffs.drift = [](double, const Vector&) { return Vector::Zero(1).eval(); };
  s.coeffs.diffusion = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  s.coeffs.jump = zero_jump(1);
  s.coeffs.drift_jacobian = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  s.coeffs.diffusion_jacobian = constant_diffusion_jacobian(1, 1);
  s.coeffs.jump_jacobian = zero_jump_jacobian(1);
  s.box = cube(1, 5.0);
  s.known_integrals = {"const", "identity"};
  s.notes = "a = b = g = 0";
  s.exact_terminal = [](const Vector& x0, const NoiseRealization&) { return x0; };
  return s;
}

Scenario make_drift1d(const ScenarioParams& p) {
  const double v = p.at("velocity");
  Scenario s;
  s.coeffs.n = 1;
  s.coeffs.m = 1;
  s.coeffs.drift = [v](double, const Vector&) { return Vector::Constant(1, v).eval(); };
  s.coeffs.diffusion = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  s.coeffs.jump = zero_jump(1);
  s.coeffs.drift_jacobian = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  s.coeffs.diffusion_jacobian = constant_diffusion_jacobian(1, 1);
  s.coeffs.jump_jacobian = zero_jump_jacobian(1);
  s.box = cube(1, 10.0);
  s.known_integrals = {"x-minus-t"};
  s.notes = "a = velocity, b = g = 0";
  s.exact_terminal = [v](const Vector& x0, const NoiseRealization& noise) {
    return (x0.array() + v * (noise.grid().t_end() - noise.grid().t0())).matrix().eval();
  };
  return s;
}

Scenario make_brownian1d(const ScenarioParams&) {
  Scenario s;
  s.coeffs.n = 1;
  s.coeffs.m = 1;
  s.coeffs.drift = [](double, const Vector&) { return Vector::Zero(1).eval(); };
  s.coeffs.diffusion = [](double, const Vector&) { return Matrix::Ones(1, 1).eval(); };
  s.coeffs.jump = zero_jump(1);
  s.coeffs.drift_jacobian = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  s.coeffs.diffusion_jacobian = constant_diffusion_jacobian(1, 1);
  s.coeffs.jump_jacobian = zero_jump_jacobian(1);
  s.box = cube(1, 20.0);
  s.notes = "dx = dw";
  s.exact_terminal = [](const Vector& x0, const NoiseRealization& noise) {
    return (x0.array() + noise.wiener()(noise.wiener().rows() - 1, 0)).matrix().eval();
  };
  return s;
}

Scenario make_ou1d(const ScenarioParams& p) {
  const double sigma = p.at("sigma");
  const double c = p.at("c");
  const double rate = p.at("rate");
  Scenario s;
  s.coeffs.n = 1;
  s.coeffs.m = 1;
  s.coeffs.drift = [](double, const Vector& x) { return (-x).eval(); };
  s.coeffs.diffusion = [sigma](double, const Vector&) { return Matrix::Constant(1, 1, sigma).eval(); };
  s.coeffs.jump = [](double, const Vector&, const Mark& g) { return Vector::Constant(1, g[0]).eval(); };
  s.coeffs.drift_jacobian = [](double, const Vector&) { return Matrix::Constant(1, 1, -1.0).eval(); };
  s.coeffs.diffusion_jacobian = constant_diffusion_jacobian(1, 1);
  s.coeffs.jump_jacobian = zero_jump_jacobian(1);
  s.marks = single_mark(c, rate);
  s.box = cube(1, 8.0);
  s.notes = "dx = -x dt + sigma dw + c dN";
  // x(T) = e^{-(T-t0)} x0 + sigma ∫ e^{-(T-s)} dw + Σ c e^{-(T-τ)}; the stochastic integral uses
  // the exact per-step weights (1/h)∫ e^{-(T-s)} ds, which converge as the realization is refined.
  s.exact_terminal = [sigma](const Vector& x0, const NoiseRealization& noise) {
    const auto& grid = noise.grid();
    const double big_t = grid.t_end();
    const double h = grid.step();
    const double w = -std::expm1(-h) / h;
    double stoch = 0.0;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      stoch += std::exp(-(big_t - grid.time(k + 1))) * w * noise.increment(k, 0);
    }
    double jumps = 0.0;
    for (const auto& e : noise.events()) jumps += noise.mark(e)[0] * std::exp(-(big_t - e.time));
    return Vector::Constant(1, std::exp(-(big_t - grid.t0())) * x0[0] + sigma * stoch + jumps).eval();
  };
  return s;
}

Matrix rotation(double angle) {
  Matrix r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

Scenario make_rot2d(const ScenarioParams& p) {
  const double angle = p.at("angle");
  const double rate = p.at("rate");
  const double eps = p.at("drift_eps");
  Scenario s;
  s.coeffs.n = 2;
  s.coeffs.m = 1;
  s.coeffs.drift = [eps](double, const Vector& x) {
    Vector a(2);
    a << -0.5 * x[0] + eps, -0.5 * x[1];
    return a;
  };
  s.coeffs.diffusion = [](double, const Vector& x) {
    Matrix b(2, 1);
    b << -x[1], x[0];
    return b;
  };
  s.coeffs.jump = [](double, const Vector& x, const Mark& g) { return ((rotation(g[0]) - Matrix::Identity(2, 2)) * x).eval(); };
  s.coeffs.drift_jacobian = [](double, const Vector&) { return (-0.5 * Matrix::Identity(2, 2)).eval(); };
  s.coeffs.diffusion_jacobian = [](double, const Vector&) {
    Matrix db(2, 2);
    db << 0.0, -1.0, 1.0, 0.0;
    return std::vector<Matrix>{db};
  };
  s.coeffs.jump_jacobian = [](double, const Vector&, const Mark& g) {
    return (rotation(g[0]) - Matrix::Identity(2, 2)).eval();
  };
  s.marks = single_mark(angle, rate);
  s.box = cube(2, 2.0);
  s.known_integrals = {"radius2"};
  s.notes = "rotational diffusion with Itô correction drift and rotation jumps";
  return s;
}

Scenario make_rotdrift2d(const ScenarioParams&) {
  Scenario s;
  s.coeffs.n = 2;
  s.coeffs.m = 1;
  s.coeffs.drift = [](double, const Vector& x) {
    Vector a(2);
    a << x[1], -x[0];
    return a;
  };
  s.coeffs.diffusion = [](double, const Vector&) { return Matrix::Zero(2, 1).eval(); };
  s.coeffs.jump = zero_jump(2);
  s.coeffs.drift_jacobian = [](double, const Vector&) {
    Matrix a(2, 2);
    a << 0.0, 1.0, -1.0, 0.0;
    return a;
  };
  s.coeffs.diffusion_jacobian = constant_diffusion_jacobian(2, 1);
  s.coeffs.jump_jacobian = zero_jump_jacobian(2);
  s.box = cube(2, 3.0);
  s.known_integrals = {"radius2"};
  s.notes = "deterministic rotation a = Ax, A = [[0,1],[-1,0]]";
  s.exact_terminal = [](const Vector& x0, const NoiseRealization& noise) {
    // exp(A t) with A = [[0,1],[-1,0]] is rotation by -t.
    return (rotation(-(noise.grid().t_end() - noise.grid().t0())) * x0).eval();
  };
  return s;
}

Scenario make_shift1d(const ScenarioParams& p) {
  const double c = p.at("c");
  const double rate = p.at("rate");
  Scenario s;
  s.coeffs.n = 1;
  s.coeffs.m = 1;
  s.coeffs.drift = [](double, const Vector&) { return Vector::Zero(1).eval(); };
  s.coeffs.diffusion = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  s.coeffs.jump = [](double, const Vector&, const Mark& g) { return Vector::Constant(1, g[0]).eval(); };
  s.coeffs.drift_jacobian = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  s.coeffs.diffusion_jacobian = constant_diffusion_jacobian(1, 1);
  s.coeffs.jump_jacobian = zero_jump_jacobian(1);
  s.marks = single_mark(c, rate);
  s.box = cube(1, 10.0);
  s.notes = "pure shift jumps g = c";
  s.exact_terminal = [](const Vector& x0, const NoiseRealization& noise) {
    double x = x0[0];
    for (const auto& e : noise.events()) x += noise.mark(e)[0];
    return Vector::Constant(1, x).eval();
  };
  return s;
}

Scenario make_tanhjump1d(const ScenarioParams& p) {
  const double k = p.at("scale");
  const double rate = p.at("rate");
  Scenario s;
  s.coeffs.n = 1;
  s.coeffs.m = 1;
  s.coeffs.drift = [](double, const Vector&) { return Vector::Zero(1).eval(); };
  s.coeffs.diffusion = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  s.coeffs.jump = [](double, const Vector& x, const Mark& g) { return Vector::Constant(1, g[0] * std::tanh(x[0])).eval(); };
  s.coeffs.drift_jacobian = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  s.coeffs.diffusion_jacobian = constant_diffusion_jacobian(1, 1);
  s.coeffs.jump_jacobian = [](double, const Vector& x, const Mark& g) {
    const double sech = 1.0 / std::cosh(x[0]);
    return Matrix::Constant(1, 1, g[0] * sech * sech).eval();
  };
  s.marks = single_mark(k, rate);
  s.box = cube(1, 5.0);
  s.notes = "pure state-dependent jumps g = scale * tanh(x)";
  return s;
}

Scenario make_nonlin1d(const ScenarioParams& p) {
  const double beta = p.at("beta");
  Scenario s;
  s.coeffs.n = 1;
  s.coeffs.m = 1;
  s.coeffs.drift = [](double, const Vector& x) { return Vector::Constant(1, -std::sin(x[0])).eval(); };
  s.coeffs.diffusion = [beta](double, const Vector& x) { return Matrix::Constant(1, 1, beta * std::cos(x[0])).eval(); };
  s.coeffs.jump = [](double, const Vector& x, const Mark& g) { return Vector::Constant(1, g[0] * std::tanh(x[0])).eval(); };
  s.coeffs.drift_jacobian = [](double, const Vector& x) { return Matrix::Constant(1, 1, -std::cos(x[0])).eval(); };
  s.coeffs.diffusion_jacobian = [beta](double, const Vector& x) {
    return std::vector<Matrix>{Matrix::Constant(1, 1, -beta * std::sin(x[0]))};
  };
  s.coeffs.jump_jacobian = [](double, const Vector& x, const Mark& g) {
    const double sech = 1.0 / std::cosh(x[0]);
    return Matrix::Constant(1, 1, g[0] * sech * sech).eval();
  };
  s.marks.marks = {scalar_mark(0.2), scalar_mark(-0.1)};
  s.marks.rates = {1.0, 0.5};
  s.box = cube(1, 4.0);
  s.notes = "a = -sin x, b = beta cos x, g = γ tanh x";
  return s;
}

struct Entry {
  std::string_view name;
  ScenarioParams defaults;
  Scenario (*build)(const ScenarioParams&);
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"brownian1d", {}, &make_brownian1d},
      {"drift1d", {{"velocity", 1.0}}, &make_drift1d},
      {"freeze", {}, &make_freeze},
      {"nonlin1d", {{"beta", 0.3}}, &make_nonlin1d},
      {"ou1d", {{"sigma", 0.5}, {"c", 1.0}, {"rate", 1.0}}, &make_ou1d},
      {"rot2d", {{"angle", std::numbers::pi / 6.0}, {"rate", 1.0}, {"drift_eps", 0.0}}, &make_rot2d},
      {"rotdrift2d", {}, &make_rotdrift2d},
      {"shift1d", {{"c", 0.5}, {"rate", 2.0}}, &make_shift1d},
      {"tanhjump1d", {{"scale", 0.1}, {"rate", 3.0}}, &make_tanhjump1d},
  };
  return entries;
}

const Entry& find_entry(std::string_view name) {
  for (const auto& e : registry()) {
    if (e.name == name) return e;
  }
  std::ostringstream msg;
  msg << "unknown scenario '" << name << "'; available:";
  for (const auto& e : registry()) msg << ' ' << e.name;
  throw NotFound(msg.str());
}

}  // namespace

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& e : registry()) out.emplace_back(e.name);
  return out;
}

ScenarioParams default_params(std::string_view name) { return find_entry(name).defaults; }

Scenario get_scenario(std::string_view name, const ScenarioParams& overrides) {
  const auto& entry = find_entry(name);
  ScenarioParams params = entry.defaults;
  for (const auto& [key, value] : overrides) {
    auto it = params.find(key);
    if (it == params.end()) {
      throw InvalidArgument("scenario '" + std::string(name) + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) throw InvalidArgument("scenario parameter '" + key + "' must be finite");
    it->second = value;
  }
  Scenario s = entry.build(params);
  s.name = std::string(name);
  s.params = std::move(params);
  s.marks.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Validation

double ValidationReport::max_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_error);
  return worst;
}

std::vector<Vector> box_lattice(const DomainBox& box, std::size_t per_axis, double inset) {
  if (per_axis == 0) throw InvalidArgument("box_lattice: per_axis must be positive");
  const auto n = static_cast<Eigen::Index>(box.dim());
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < n; ++i) total *= per_axis;
  std::vector<Vector> pts;
  pts.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vector x(n);
    std::size_t rem = flat;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t idx = rem % per_axis;
      rem /= per_axis;
      const double lo = box.lo[i] + inset;
      const double hi = box.hi[i] - inset;
      x[i] = per_axis == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(idx) / static_cast<double>(per_axis - 1);
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

namespace {

// Tracks the worst |analytic - fd| entry of one coefficient.
void accumulate(ValidationEntry& entry, const Matrix& analytic, const Matrix& fd, const Vector& x) {
  for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
    for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
      const double err = std::abs(analytic(i, j) - fd(i, j));
      if (err > entry.max_error || entry.at.size() == 0) {
        entry.max_error = std::max(err, entry.max_error);
        entry.row = static_cast<std::size_t>(i);
        entry.col = static_cast<std::size_t>(j);
        entry.at = x;
      }
    }
  }
}

Matrix fd_matrix(const std::function<Vector(const Vector&)>& f, const Vector& x, double delta) {
  const Eigen::Index n = x.size();
  Matrix out;
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector col;
    const Vector f0 = f(x);
    col.resize(f0.size());
    for (Eigen::Index i = 0; i < f0.size(); ++i) {
      col[i] = fd_derivative([&](const Vector& y) { return f(y)[i]; }, x, static_cast<std::size_t>(j), delta);
    }
    if (j == 0) out.resize(col.size(), n);
    out.col(j) = col;
  }
  return out;
}

}  // namespace

ValidationReport validate_scenario(const Scenario& s, std::span<const Vector> points, double delta, double tol,
                                   double t) {
  const auto& c = s.coeffs;
  if (!c.has_analytic_derivatives()) {
    throw InvalidArgument("validate_scenario: scenario '" + s.name + "' has no analytic derivatives");
  }
  ValidationReport report;
  report.scenario = s.name;
  report.tolerance = tol;

  ValidationEntry drift{"drift", 0.0, 0, 0, Vector()};
  std::vector<ValidationEntry> diffusion;
  for (std::size_t k = 0; k < c.m; ++k) diffusion.push_back({"diffusion[" + std::to_string(k) + "]", 0.0, 0, 0, Vector()});
  std::vector<ValidationEntry> jump;
  for (std::size_t j = 0; j < s.marks.size(); ++j) jump.push_back({"jump[" + std::to_string(j) + "]", 0.0, 0, 0, Vector()});

  for (const auto& x : points) {
    accumulate(drift, c.drift_jacobian(t, x), fd_matrix([&](const Vector& y) { return c.drift(t, y); }, x, delta), x);
    const auto db = c.diffusion_jacobian(t, x);
    for (std::size_t k = 0; k < c.m; ++k) {
      const auto col = static_cast<Eigen::Index>(k);
      accumulate(diffusion[k], db.at(k),
                 fd_matrix([&](const Vector& y) -> Vector { return c.diffusion(t, y).col(col); }, x, delta), x);
    }
    for (std::size_t j = 0; j < s.marks.size(); ++j) {
      const auto& mark = s.marks.marks[j];
      accumulate(jump[j], c.jump_jacobian(t, x, mark),
                 fd_matrix([&](const Vector& y) { return c.jump(t, y, mark); }, x, delta), x);
    }
  }

  report.entries.push_back(std::move(drift));
  for (auto& e : diffusion) report.entries.push_back(std::move(e));
  for (auto& e : jump) report.entries.push_back(std::move(e));
  report.pass = std::all_of(report.entries.begin(), report.entries.end(),
                            [tol](const ValidationEntry& e) { return e.max_error <= tol; });
  return report;
}

}  // namespace jumpsde
