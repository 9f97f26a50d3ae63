#include <gtest/gtest.h>

#include <cmath>

#include "jumpsde/errors.hpp"
#include "jumpsde/integral.hpp"
#include "support/oracles.hpp"

using namespace jumpsde;

namespace {

std::vector<LatticePoint> lattice(const Scenario& s, std::size_t per_axis) {
  const double t0[] = {0.0};
  return condition_lattice(s.box, per_axis, t0);
}

}  // namespace

TEST(Candidates, RegistryAndDerivatives) {
  EXPECT_THROW(get_candidate("nope", 2), NotFound);
  const auto s = get_scenario("rot2d");
  const double times[] = {0.0, 0.7};
  const auto pts = condition_lattice(s.box, 5, times);
  for (const auto& name : candidate_names()) {
    EXPECT_LE(candidate_derivative_error(get_candidate(name, 2), pts), 1e-5) << name;
  }
}

TEST(Conditions, ConstantAlwaysPasses) {
  for (const auto& name : scenario_names()) {
    const auto s = get_scenario(name);
    const auto r = check_conditions(get_candidate("const", s.dim()), s, lattice(s, 5));
    for (const auto& res : r.residuals) EXPECT_EQ(res.sup, 0.0) << name << " " << res.name;
    EXPECT_TRUE(r.pass);
  }
}

TEST(Conditions, Rot2dRadius) {
  const auto s = get_scenario("rot2d");
  const auto r = check_conditions(get_candidate("radius2", 2), s, lattice(s, 21));
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.get("R1").sup, 1e-9);
  EXPECT_LE(r.get("R2").sup, 1e-9);
  EXPECT_LE(r.get("R3").sup, 1e-9);
  EXPECT_LE(r.preimage_gap, 1e-10);
}

TEST(Conditions, PerturbedDriftFlagsR2) {
  const auto s = get_scenario("rot2d", {{"drift_eps", 0.1}});
  const auto r = check_conditions(get_candidate("radius2", 2), s, lattice(s, 21));
  EXPECT_FALSE(r.pass);
  // R2 = |2 x1 eps|, largest at |x1| = 2.
  EXPECT_NEAR(r.get("R2").sup, 0.4, 1e-12);
  EXPECT_NEAR(std::abs(r.get("R2").at.x[0]), 2.0, 1e-12);
  EXPECT_EQ(r.failing(), std::vector<std::string>{"R2"});
}

TEST(Conditions, TimeDependentIntegral) {
  const auto s = get_scenario("drift1d");
  const double times[] = {0.0, 0.5, 1.0};
  const auto r = check_conditions(get_candidate("x-minus-t", 1), s, condition_lattice(s.box, 7, times));
  EXPECT_TRUE(r.pass);
  const auto fail = check_conditions(get_candidate("identity", 1), s, condition_lattice(s.box, 7, times));
  EXPECT_NEAR(fail.get("R2").sup, 1.0, 1e-12);
}

TEST(Conditions, JumpConditionFailsForNonInvariant) {
  const auto s = get_scenario("shift1d");
  const auto r = check_conditions(get_candidate("identity", 1), s, lattice(s, 5));
  EXPECT_NEAR(r.get("R3").sup, 0.5, 1e-12);
  EXPECT_LE(r.preimage_gap, 1e-10);
}

TEST(Eq35Series, ConstantIsZero) {
  const auto s = get_scenario("rot2d");
  const auto noise = sample_noise(build_grid(0.0, 1.0, 64), 1, s.marks, 1);
  const auto series = eq35_residual_series(get_candidate("const", 2), s, simulate_path(s, Vector::Unit(2, 0), noise), noise);
  for (double v : series.increments) EXPECT_EQ(v, 0.0);
}

TEST(Eq35Series, UnitDriftIdentity) {
  const auto s = get_scenario("drift1d");
  const auto noise = sample_noise(build_grid(0.0, 1.0, 32), 1, s.marks, 1);
  const auto series = eq35_residual_series(get_candidate("identity", 1), s, simulate_path(s, Vector::Zero(1), noise), noise);
  for (double v : series.increments) EXPECT_DOUBLE_EQ(v, -1.0 / 32.0);
}

TEST(Eq35Series, Rot2dRadiusBracket) {
  const auto s = get_scenario("rot2d", {{"rate", 0.0}});
  const auto noise = sample_noise(build_grid(0.0, 1.0, 64), 1, s.marks, 2);
  const auto path = simulate_path(s, Vector::Unit(2, 0), noise);
  const auto series = eq35_residual_series(get_candidate("radius2", 2), s, path, noise);
  const double h = 1.0 / 64;
  for (std::size_t k = 0; k < 64; ++k) {
    const Vector& x = path.states[k];
    // The Wiener part -b.grad u dW vanishes because b.grad u = 0 for this pair.
    EXPECT_NEAR(series.increments[k], oracle::rot2d_radius_bracket(x[0], x[1]) * h, 1e-14);
  }
}

TEST(Oracle, FreezeHasZeroDeviation) {
  const auto s = get_scenario("freeze");
  const auto st = conservation_oracle(get_candidate("radius2", 1), s, Vector::Constant(1, 0.7), build_grid(0.0, 1.0, 32), 20, 1);
  EXPECT_EQ(st.mean, 0.0);
  EXPECT_EQ(st.max, 0.0);
  EXPECT_EQ(st.diverged, 0u);
}

TEST(Oracle, DivergedPathsCounted) {
  const auto s = get_scenario("drift1d", {{"velocity", 1e10}});
  const auto st = conservation_oracle(get_candidate("identity", 1), s, Vector::Zero(1), build_grid(0.0, 1.0, 4), 3, 1);
  EXPECT_EQ(st.diverged, 3u);
}

TEST(Oracle, StudyLevelsAreCoupled) {
  const auto s = get_scenario("rot2d");
  const auto study = conservation_study(get_candidate("radius2", 2), s, Vector::Unit(2, 0), build_grid(0.0, 1.0, 32), 3, 40, 1);
  ASSERT_EQ(study.levels.size(), 3u);
  ASSERT_TRUE(study.fit.has_value());
  EXPECT_GT(study.levels[0].mean, study.levels[2].mean);
  EXPECT_DOUBLE_EQ(study.steps[2], 1.0 / 128);
}

TEST(Oracle, PerturbedDriftPlateaus) {
  const auto s = get_scenario("rot2d", {{"drift_eps", 0.1}});
  const auto st = conservation_oracle(get_candidate("radius2", 2), s, Vector::Unit(2, 0), build_grid(0.0, 1.0, 512), 50, 1);
  EXPECT_GE(st.mean, 0.01);
}
