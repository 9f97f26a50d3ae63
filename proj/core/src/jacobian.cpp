#include "jumpsde/jacobian.hpp"

#include <cmath>
#include <string>

#include "jumpsde/errors.hpp"

namespace jumpsde {

double determinant(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("determinant of a non-square matrix");
  if (m.rows() == 0) return 1.0;
  return Eigen::PartialPivLU<Matrix>(m).determinant();
}

namespace {

class VariationalObserver final : public PathObserver {
 public:
  VariationalObserver(const Scenario& s, const NoiseRealization& noise, JacobianState& out)
      : s_(s), noise_(noise), out_(out), j_(Matrix::Identity(static_cast<Eigen::Index>(s.dim()), static_cast<Eigen::Index>(s.dim()))) {}

  void on_step(std::size_t k, double t, const Vector& x) override {
    record();
    const double h = noise_.grid().step();
    Matrix gen = s_.coeffs.drift_derivative(t, x) * h;
    const auto db = s_.coeffs.diffusion_derivative(t, x);
    for (std::size_t q = 0; q < s_.wiener_dim(); ++q) gen += db[q] * noise_.increment(k, q);
    j_ = j_ + gen * j_;
  }

  void on_jump(const AppliedEvent& e) override {
    const auto n = static_cast<Eigen::Index>(s_.dim());
    const Matrix step = Matrix::Identity(n, n) + s_.coeffs.jump_derivative(e.time, e.pre, noise_.marks().marks[e.mark_index]);
    j_ = step * j_;
  }

  void record() {
    const double d = determinant(j_);
    if (std::abs(d) < kDegenerateDet) out_.degenerate_nodes.push_back(out_.matrices.size());
    out_.matrices.push_back(j_);
    out_.dets.push_back(d);
  }

 private:
  const Scenario& s_;
  const NoiseRealization& noise_;
  JacobianState& out_;
  Matrix j_;
};

}  // namespace

JacobianRun simulate_jacobian(const Scenario& s, const Vector& x0, const NoiseRealization& noise) {
  JacobianState state{noise.grid(), {}, {}, {}};
  state.matrices.reserve(noise.grid().nodes());
  state.dets.reserve(noise.grid().nodes());
  VariationalObserver observer(s, noise, state);
  Path path = simulate_path(s, x0, noise, observer);
  observer.record();
  return {std::move(path), std::move(state)};
}

Matrix jacobian_fd_oracle(const Scenario& s, const Vector& x0, const NoiseRealization& noise, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("jacobian_fd_oracle: bump must be positive");
  const auto n = static_cast<Eigen::Index>(s.dim());
  if (x0.size() != n) throw InvalidArgument("jacobian_fd_oracle: initial state has wrong dimension");
  Matrix jac(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector xp = x0;
    Vector xm = x0;
    xp[j] += delta;
    xm[j] -= delta;
    if (!s.box.contains(xp) || !s.box.contains(xm)) {
      throw InvalidArgument("jacobian_fd_oracle: bumped start leaves the domain box");
    }
    try {
      const Vector up = simulate_path(s, xp, noise).terminal();
      const Vector down = simulate_path(s, xm, noise).terminal();
      jac.col(j) = (up - down) / (2.0 * delta);
    } catch (const DivergedPath& e) {
      throw OracleFailure(std::string("bumped path diverged: ") + e.what());
    }
  }
  return jac;
}

}  // namespace jumpsde
