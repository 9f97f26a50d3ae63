#include <gtest/gtest.h>

#include <cmath>

#include "jumpsde/errors.hpp"
#include "jumpsde/noise.hpp"

using namespace jumpsde;

namespace {

MarkSpace one_mark(double value, double rate) { return {{Mark::Constant(1, value)}, {rate}}; }

}  // namespace

TEST(TimeGrid, NodesAndStep) {
  const TimeGrid g(0.0, 1.0, 8);
  EXPECT_EQ(g.steps(), 8u);
  EXPECT_EQ(g.nodes(), 9u);
  EXPECT_DOUBLE_EQ(g.step(), 0.125);
  EXPECT_EQ(g.time(8), 1.0);
  EXPECT_DOUBLE_EQ(g.time(3), 0.375);
}

TEST(TimeGrid, RejectsBadInput) {
  EXPECT_THROW(build_grid(0.0, 1.0, 0), InvalidArgument);
  EXPECT_THROW(build_grid(1.0, 1.0, 4), InvalidArgument);
  EXPECT_THROW(build_grid(0.0, NAN, 4), InvalidArgument);
}

TEST(TimeGrid, StepContaining) {
  const TimeGrid g(0.0, 1.0, 4);
  EXPECT_EQ(g.step_containing(0.0), 0u);
  EXPECT_EQ(g.step_containing(0.25), 0u);
  EXPECT_EQ(g.step_containing(0.2500001), 1u);
  EXPECT_EQ(g.step_containing(1.0), 3u);
}

TEST(MarkSpace, Validation) {
  EXPECT_NO_THROW(one_mark(1.0, 2.0).validate());
  EXPECT_THROW(one_mark(1.0, 0.0).validate(), InvalidArgument);
  MarkSpace bad{{Mark::Constant(1, 1.0)}, {}};
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(SampleNoise, DeterministicPerSeed) {
  const auto g = build_grid(0.0, 1.0, 64);
  const auto a = sample_noise(g, 2, one_mark(1.0, 3.0), 11);
  const auto b = sample_noise(g, 2, one_mark(1.0, 3.0), 11);
  const auto c = sample_noise(g, 2, one_mark(1.0, 3.0), 12);
  EXPECT_EQ(a.increments(), b.increments());
  EXPECT_EQ(a.events(), b.events());
  EXPECT_NE(a.increments(), c.increments());
}

TEST(SampleNoise, WienerVarianceMatchesStep) {
  const auto g = build_grid(0.0, 1.0, 4096);
  const auto n = sample_noise(g, 1, {}, 5);
  const double var = n.increments().squaredNorm() / static_cast<double>(g.steps());
  EXPECT_NEAR(var / g.step(), 1.0, 0.1);
  EXPECT_NEAR(n.wiener()(4096, 0), n.increments().sum(), 1e-12);
  EXPECT_EQ(n.wiener()(0, 0), 0.0);
}

TEST(SampleNoise, EventsSortedAndAttributed) {
  const auto g = build_grid(0.0, 2.0, 50);
  const auto n = sample_noise(g, 1, one_mark(0.5, 10.0), 3);
  ASSERT_FALSE(n.events().empty());
  std::size_t seen = 0;
  for (std::size_t k = 0; k < g.steps(); ++k) {
    EXPECT_EQ(n.events_before_step(k), seen);
    for (const auto& e : n.events_in_step(k)) {
      EXPECT_GT(e.time, g.time(k));
      EXPECT_LE(e.time, g.time(k + 1));
      ++seen;
    }
  }
  EXPECT_EQ(seen, n.events().size());
  for (std::size_t i = 1; i < n.events().size(); ++i) EXPECT_LT(n.events()[i - 1].time, n.events()[i].time);
}

TEST(SampleNoise, PoissonCountMean) {
  const auto g = build_grid(0.0, 1.0, 10);
  double total = 0.0;
  for (std::uint64_t s = 0; s < 400; ++s) total += static_cast<double>(sample_noise(g, 1, one_mark(1.0, 4.0), s).events().size());
  EXPECT_NEAR(total / 400.0, 4.0, 0.4);
}

TEST(RefineNoise, PreservesCoarseIncrementsAndEvents) {
  const auto g = build_grid(0.0, 1.0, 16);
  const auto coarse = sample_noise(g, 2, one_mark(1.0, 5.0), 9);
  const auto fine = refine_noise(coarse, 4);
  EXPECT_EQ(fine.grid().steps(), 64u);
  EXPECT_EQ(fine.events(), coarse.events());
  for (std::size_t k = 0; k < 16; ++k) {
    for (std::size_t q = 0; q < 2; ++q) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 4; ++j) sum += fine.increment(4 * k + j, q);
      EXPECT_NEAR(sum, coarse.increment(k, q), 1e-13);
    }
  }
  EXPECT_THROW(refine_noise(coarse, 1), InvalidArgument);
}

TEST(RefineNoise, BridgeVarianceIsFineStep) {
  const auto g = build_grid(0.0, 1.0, 8);
  const auto fine = refine_noise(sample_noise(g, 1, {}, 2), 512);
  const double var = fine.increments().squaredNorm() / static_cast<double>(fine.grid().steps());
  EXPECT_NEAR(var / fine.grid().step(), 1.0, 0.1);
}

TEST(RefineChain, Levels) {
  const auto chain = refine_chain(sample_noise(build_grid(0.0, 1.0, 4), 1, {}, 1), 3);
  ASSERT_EQ(chain.size(), 3u);
  EXPECT_EQ(chain[2].grid().steps(), 16u);
}
