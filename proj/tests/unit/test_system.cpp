#include <gtest/gtest.h>

#include <cmath>

#include "jumpsde/errors.hpp"
#include "jumpsde/system.hpp"

using namespace jumpsde;

TEST(Registry, NamesAndLookup) {
  const auto names = scenario_names();
  EXPECT_GE(names.size(), 8u);
  for (const auto& n : names) EXPECT_EQ(get_scenario(n).name, n);
  EXPECT_THROW(get_scenario("nope"), NotFound);
  EXPECT_THROW(get_scenario("rot2d", {{"bogus", 1.0}}), InvalidArgument);
}

TEST(Registry, ParameterOverride) {
  const auto s = get_scenario("ou1d", {{"sigma", 0.0}, {"rate", 0.0}});
  EXPECT_TRUE(s.marks.empty());
  EXPECT_EQ(s.coeffs.diffusion(0.0, Vector::Constant(1, 2.0))(0, 0), 0.0);
}

TEST(Registry, EveryScenarioPassesDerivativeValidation) {
  for (const auto& n : scenario_names()) {
    const auto s = get_scenario(n);
    const auto pts = box_lattice(s.box, 5);
    const auto r = validate_scenario(s, pts, 1e-5, 1e-6);
    EXPECT_TRUE(r.pass) << n << " max error " << r.max_error();
  }
}

TEST(Registry, ValidationCatchesWrongDerivative) {
  auto s = get_scenario("rot2d");
  s.coeffs.drift_jacobian = [](double, const Vector&) { return Matrix::Zero(2, 2).eval(); };
  const auto pts = box_lattice(s.box, 3);
  const auto r = validate_scenario(s, pts, 1e-5, 1e-6);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.max_error(), 0.5, 1e-8);
}

TEST(FiniteDifference, CentralDerivative) {
  const auto f = [](const Vector& x) { return std::sin(x[0]) * x[1]; };
  Vector x(2);
  x << 0.3, 2.0;
  EXPECT_NEAR(fd_derivative(f, x, 0, 1e-5), std::cos(0.3) * 2.0, 1e-9);
  EXPECT_THROW(fd_derivative(f, x, 0, 0.0), InvalidArgument);
  EXPECT_DOUBLE_EQ(fd_step(100.0), 1e-3);
  EXPECT_DOUBLE_EQ(fd_step(0.1), 1e-5);
}

TEST(FiniteDifference, Jacobian) {
  const auto f = [](const Vector& x) {
    Vector y(2);
    y << x[0] * x[1], x[0] * x[0];
    return y;
  };
  Vector x(2);
  x << 1.5, -2.0;
  const Matrix j = fd_jacobian(f, x);
  EXPECT_NEAR(j(0, 0), -2.0, 1e-8);
  EXPECT_NEAR(j(0, 1), 1.5, 1e-8);
  EXPECT_NEAR(j(1, 0), 3.0, 1e-8);
  EXPECT_NEAR(j(1, 1), 0.0, 1e-8);
}

TEST(BoxLattice, CountAndBounds) {
  const DomainBox b{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)};
  const auto pts = box_lattice(b, 5);
  EXPECT_EQ(pts.size(), 25u);
  for (const auto& p : pts) EXPECT_TRUE(b.contains(p));
  const auto inset = box_lattice(b, 2, 0.5);
  EXPECT_DOUBLE_EQ(inset.front()[0], -0.5);
}

TEST(FieldProcess, StaticIsZero) {
  const auto p = static_field_process(2, 1);
  const Vector x = Vector::Constant(2, 0.7);
  EXPECT_EQ(p.drift(0.0, x), 0.0);
  EXPECT_EQ(p.diffusion(0.0, x).norm(), 0.0);
  EXPECT_EQ(p.jump(0.0, x, Mark::Constant(1, 1.0)), 0.0);
  EXPECT_EQ(p.diffusion_derivative(0.0, x).norm(), 0.0);
}
