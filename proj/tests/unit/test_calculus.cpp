#include <gtest/gtest.h>

#include <cmath>

#include "jumpsde/calculus.hpp"
#include "jumpsde/errors.hpp"
#include "jumpsde/integral.hpp"

using namespace jumpsde;

namespace {

SmoothScalarField value_only(std::function<double(double, const Vector&)> f) {
  SmoothScalarField s;
  s.value = std::move(f);
  return s;
}

}  // namespace

TEST(SmoothScalarField, FdFallbacks) {
  const auto f = value_only([](double t, const Vector& x) { return t * x[0] * x[0] + std::sin(x[1]); });
  Vector x(2);
  x << 0.5, 0.2;
  EXPECT_NEAR(f.dt(2.0, x), 0.25, 1e-8);
  EXPECT_NEAR(f.grad(2.0, x)[0], 2.0, 1e-8);
  EXPECT_NEAR(f.grad(2.0, x)[1], std::cos(0.2), 1e-8);
  const Matrix h = f.hess(2.0, x);
  EXPECT_NEAR(h(0, 0), 4.0, 1e-5);
  EXPECT_NEAR(h(1, 1), -std::sin(0.2), 1e-5);
  EXPECT_NEAR(h(0, 1), 0.0, 1e-5);
}

TEST(ItoSeries, ExactForConstantAndIdentity) {
  for (const auto& name : {"rot2d", "ou1d", "nonlin1d", "brownian1d"}) {
    const auto s = get_scenario(name);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto noise = sample_noise(build_grid(0.0, 1.0, 128), s.wiener_dim(), s.marks, seed);
      const auto path = simulate_path(s, Vector::Constant(static_cast<Eigen::Index>(s.dim()), 0.5), noise);
      for (const auto& cand : {"const", "identity"}) {
        const auto f = get_candidate(cand, s.dim()).u;
        EXPECT_LE(ito_series(f, s, path, noise).discrepancy, 1e-12) << name << " " << cand;
      }
    }
  }
}

TEST(ItoSeries, ExactForPureJumpSystems) {
  for (const auto& name : {"shift1d", "tanhjump1d"}) {
    const auto s = get_scenario(name);
    const auto noise = sample_noise(build_grid(0.0, 1.0, 64), s.wiener_dim(), s.marks, 3);
    const auto path = simulate_path(s, Vector::Constant(1, 0.8), noise);
    const auto f = value_only([](double, const Vector& x) { return std::exp(x[0]) + x[0] * x[0]; });
    EXPECT_LE(ito_series(f, s, path, noise).discrepancy, 1e-12) << name;
  }
}

TEST(ItoSeries, RejectsMismatchedGrids) {
  const auto s = get_scenario("brownian1d");
  const auto a = sample_noise(build_grid(0.0, 1.0, 16), 1, s.marks, 1);
  const auto b = sample_noise(build_grid(0.0, 1.0, 32), 1, s.marks, 1);
  const auto path = simulate_path(s, Vector::Constant(1, 0.0), a);
  EXPECT_THROW(ito_series(get_candidate("identity", 1).u, s, path, b), InvalidArgument);
}

TEST(ItoSeries, QuadraticUnderBrownianMotion) {
  // f = x^2, dx = dW: the Euler increment 2x dW + h misses dW^2 - h per step.
  const auto s = get_scenario("brownian1d");
  const auto noise = sample_noise(build_grid(0.0, 1.0, 32), 1, s.marks, 4);
  const auto path = simulate_path(s, Vector::Constant(1, 0.0), noise);
  const auto series = ito_series(get_candidate("x1-squared", 1).u, s, path, noise);
  double expect = 0.0;
  for (std::size_t k = 0; k < 32; ++k) expect += noise.increment(k, 0) * noise.increment(k, 0) - 1.0 / 32.0;
  EXPECT_NEAR(series.direct_change - series.cumulative.back(), expect, 1e-12);
}

TEST(InverseJumpMap, RotationAndTanh) {
  const auto rot = get_scenario("rot2d");
  Vector x(2);
  x << 0.3, 1.1;
  const auto pre = inverse_jump_map(rot, 0.0, x, rot.marks.marks[0]);
  EXPECT_NEAR((pre.y + rot.coeffs.jump(0.0, pre.y, rot.marks.marks[0]) - x).norm(), 0.0, 1e-12);
  EXPECT_NEAR(pre.det_inv, 1.0, 1e-12);

  const auto th = get_scenario("tanhjump1d");
  const auto p1 = inverse_jump_map(th, 0.0, Vector::Constant(1, 0.9), th.marks.marks[0]);
  EXPECT_NEAR(p1.y[0] + 0.1 * std::tanh(p1.y[0]), 0.9, 1e-12);
  EXPECT_NEAR(p1.det_inv, 1.0 / (1.0 + 0.1 / std::pow(std::cosh(p1.y[0]), 2)), 1e-12);
  EXPECT_GE(p1.iterations, 2u);

  const auto sh = get_scenario("shift1d");
  EXPECT_EQ(inverse_jump_map(sh, 0.0, Vector::Constant(1, 1.0), sh.marks.marks[0]).iterations, 1u);
}

TEST(InverseJumpMap, SingularJump) {
  auto s = get_scenario("tanhjump1d", {{"scale", -1.0}});
  EXPECT_THROW(inverse_jump_map(s, 0.0, Vector::Constant(1, 0.0), s.marks.marks[0]), SingularJump);
}

TEST(JumpTerms, ForwardEqualsPreimageForm) {
  const auto s = get_scenario("tanhjump1d");
  const PointFunction z = [](const Vector& x) { return x[0] * x[0] * x[0]; };
  const Vector x = Vector::Constant(1, 0.4);
  const Vector post = x + s.coeffs.jump(0.0, x, s.marks.marks[0]);
  EXPECT_NEAR(jump_term_forward(z, s, 0.0, x, s.marks.marks[0]), jump_term_preimage(z, s, 0.0, post, s.marks.marks[0]),
              1e-12);
}

TEST(FieldSetups, Registry) {
  EXPECT_EQ(field_setup_names().size(), 5u);
  EXPECT_THROW(get_field_setup("nope", 2, 1), NotFound);
  EXPECT_THROW(get_field_setup("rot2d-mixed", 1, 1), InvalidArgument);
  EXPECT_DOUBLE_EQ(stencil_step(0.5), 1e-3);
  EXPECT_DOUBLE_EQ(stencil_step(-4.0), 4e-3);
}

TEST(ItoWentzell, StaticFieldReducesToIto) {
  for (const auto& name : scenario_names()) {
    const auto s = get_scenario(name);
    const auto field = get_field_setup("static-smooth", s.dim(), s.wiener_dim());
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto noise = sample_noise(build_grid(0.0, 1.0, 64), s.wiener_dim(), s.marks, seed);
      const Vector x0 = Vector::Constant(static_cast<Eigen::Index>(s.dim()), 0.3);
      const auto comp = ito_wentzel_series(field, s, x0, noise);
      const auto ito = ito_series(field.initial, s, comp.path, noise);
      ASSERT_EQ(comp.series.increments.size(), ito.increments.size());
      for (std::size_t k = 0; k < ito.increments.size(); ++k) {
        EXPECT_EQ(comp.series.increments[k], ito.increments[k]) << name << " step " << k;
      }
    }
  }
}

TEST(ItoWentzell, AdditiveFieldIsExact) {
  // z = x1 + W: composite increment is dW + dx1 exactly, so both routes agree to rounding.
  const auto s = get_scenario("rot2d");
  const auto field = get_field_setup("additive-x1", 2, 1);
  const auto noise = sample_noise(build_grid(0.0, 1.0, 64), 1, s.marks, 2);
  const auto rep = composite_consistency(field, s, Vector::Unit(2, 0), noise);
  EXPECT_LE(rep.terminal_difference, 1e-12);
}

TEST(ItoWentzell, UnitDriftAddsTime) {
  const auto s = get_scenario("freeze");
  const auto field = get_field_setup("unit-drift", 1, 1);
  const auto noise = sample_noise(build_grid(0.0, 1.0, 64), 1, s.marks, 2);
  const auto run = ito_wentzel_series(field, s, Vector::Constant(1, 0.25), noise);
  EXPECT_NEAR(run.series.terminal(), 1.25, 1e-12);
}

TEST(ItoWentzell, MixedFieldConsistencyShrinks) {
  const auto s = get_scenario("rot2d");
  const auto field = get_field_setup("rot2d-mixed", 2, 1);
  const auto chain = refine_chain(sample_noise(build_grid(0.0, 1.0, 64), 1, s.marks, 5), 4);
  const double coarse = composite_consistency(field, s, Vector::Unit(2, 0), chain.front()).terminal_difference;
  const double fine = composite_consistency(field, s, Vector::Unit(2, 0), chain.back()).terminal_difference;
  EXPECT_GT(coarse, 0.0);
  EXPECT_LT(fine, coarse);
}

TEST(ItoWentzell, StencilLeavingBoxThrows) {
  const auto s = get_scenario("rot2d");
  const auto field = get_field_setup("rot2d-mixed", 2, 1);
  const auto noise = sample_noise(build_grid(0.0, 1.0, 16), 1, s.marks, 1);
  Vector x0(2);
  x0 << 2.0, 0.0;
  EXPECT_THROW(ito_wentzel_series(field, s, x0, noise), DomainExit);
}
