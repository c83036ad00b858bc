#include <gtest/gtest.h>

#include "ec3pt/optimizer.hpp"
#include "oracles.hpp"

using namespace ec3pt;

TEST(Optimizer, SingleClauseHandWeights) {
  const Instance inst(3, {{0, 1, 2}});
  const CorrectionVector cv{{3.0, 1.0, 2.0}};
  const auto lo = optimize_over_solutions(inst, cv, Direction::kMin);
  EXPECT_EQ(lo.argbest.to_string(), "010");
  EXPECT_DOUBLE_EQ(lo.value, 1.0);
  const auto hi = optimize_over_solutions(inst, cv, Direction::kMax);
  EXPECT_EQ(hi.argbest.to_string(), "100");
  EXPECT_DOUBLE_EQ(hi.value, 3.0);
}

TEST(Optimizer, TiesGoToLexicographicallySmallest) {
  const Instance inst(3, {{0, 1, 2}});
  const CorrectionVector cv{{1.0, 1.0, 1.0}};
  EXPECT_EQ(optimize_over_solutions(inst, cv, Direction::kMin).argbest.to_string(), "001");
  EXPECT_EQ(optimize_over_solutions(inst, cv, Direction::kMax).argbest.to_string(), "001");
}

TEST(Optimizer, MatchesBruteForceOnTrimmedInstances) {
  std::size_t checked = 0;
  for (std::uint64_t s = 0; checked < 200 && s < 5000; ++s) {
    const std::size_t n = 20 + s % 6;
    const Instance raw = generate(n, std::size_t(std::lround(0.62 * n)), derive_seed(51, s));
    const auto [t, map] = trim(raw);
    if (t.n_vars() == 0) continue;
    const auto sols = oracle::exhaustive_solutions(t);
    if (sols.empty()) continue;
    CorrectionVector cv;
    try {
      cv = correction_coefficients(t);
    } catch (const UntrimmedDegeneracy&) {
      continue;
    }
    const double tol = tie_tolerance(cv);
    for (Direction d : {Direction::kMin, Direction::kMax}) {
      const auto want = oracle::best_of(sols, cv.weights, d == Direction::kMin, tol);
      const auto got = optimize_over_solutions(t, cv, d);
      ASSERT_EQ(got.argbest, want.x) << "seed " << s;
      EXPECT_NEAR(got.value, want.value, 1e-12);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 200u);
}

TEST(Optimizer, BranchOrderDoesNotChangeResult) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto [t, map] = trim(generate_satisfiable(80, 50, derive_seed(52, s), 100));
    if (t.n_vars() == 0) continue;
    CorrectionVector cv;
    try {
      cv = correction_coefficients(t);
    } catch (const UntrimmedDegeneracy&) {
      continue;
    }
    for (Direction d : {Direction::kMin, Direction::kMax}) {
      const auto a = optimize_over_solutions(t, cv, d, BranchOrder::kLargestWeight);
      const auto b = optimize_over_solutions(t, cv, d, BranchOrder::kLowestIndex);
      const auto c = optimize_over_solutions(t, cv, d, BranchOrder::kHighestIndex);
      EXPECT_EQ(a.argbest, b.argbest);
      EXPECT_EQ(a.argbest, c.argbest);
    }
  }
}

TEST(Optimizer, MinNeverExceedsMaxAndBothAreSolutions) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto [t, map] = trim(generate_satisfiable(120, 74, derive_seed(53, s), 100));
    if (t.n_vars() == 0) continue;
    const auto cv = correction_coefficients(t);
    const auto lo = optimize_over_solutions(t, cv, Direction::kMin);
    const auto hi = optimize_over_solutions(t, cv, Direction::kMax);
    EXPECT_LE(lo.value, hi.value + tie_tolerance(cv));
    EXPECT_EQ(cost(t, lo.argbest), 0u);
    EXPECT_EQ(cost(t, hi.argbest), 0u);
    EXPECT_NEAR(lo.value, correction_value(cv, lo.argbest), 1e-12);
  }
}

TEST(Optimizer, UnsatisfiableThrows) {
  const Instance inst(4, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
  const CorrectionVector cv{{1, 1, 1, 1}};
  EXPECT_THROW(optimize_over_solutions(inst, cv, Direction::kMin), NoSolution);
}

TEST(Optimizer, RejectsBadWeights) {
  const Instance inst(3, {{0, 1, 2}});
  EXPECT_THROW(optimize_over_solutions(inst, CorrectionVector{{1, -1, 1}}, Direction::kMin),
               InvalidArgument);
  EXPECT_THROW(optimize_over_solutions(inst, CorrectionVector{{1, 1}}, Direction::kMin),
               DimensionError);
}

TEST(Optimizer, FreeVariablesOnlyHelpMax) {
  const Instance inst(4, {{0, 1, 2}});
  const CorrectionVector cv{{1.0, 2.0, 3.0, 5.0}};
  EXPECT_EQ(optimize_over_solutions(inst, cv, Direction::kMin).argbest.to_string(), "1000");
  EXPECT_EQ(optimize_over_solutions(inst, cv, Direction::kMax).argbest.to_string(), "0011");
}
