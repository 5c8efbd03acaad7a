#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "faithlab/theory.hpp"

using namespace faithlab;

namespace {

TheoryInstance example(Regime regime) { return TheoryInstance{{1, 2, 3}, {3, -1, 2}, 0.0, regime}; }

}  // namespace

TEST(Theory, ZeroRegimeDeletionSums) {
  const auto inst = example(Regime::kZero);
  EXPECT_EQ(exact_deletion_sum(inst, Ordering{2, 0, 1}), -1.0);
  EXPECT_EQ(exact_deletion_sum(inst, Ordering{0, 2, 1}), 2.0);
}

TEST(Theory, UniformRegimeDeletionSums) {
  const auto inst = example(Regime::kUniformExpected);
  EXPECT_EQ(exact_deletion_sum(inst, Ordering{1, 2, 0}), 23.0);
  EXPECT_EQ(exact_deletion_sum(inst, Ordering{0, 2, 1}), 27.0);
}

TEST(Theory, InsertionSums) {
  const auto inst = example(Regime::kZero);
  EXPECT_EQ(exact_insertion_sum(inst, Ordering{2, 0, 1}), 22.0);
  EXPECT_EQ(exact_insertion_sum(inst, Ordering{1, 0, 2}), 6.0);
}

TEST(Theory, ClosedFormsMatchSimulation) {
  std::mt19937_64 rng(1);
  for (auto regime : {Regime::kZero, Regime::kUniformExpected}) {
    for (auto inst : random_instances(30, 5, 3)) {
      inst.regime = regime;
      Ordering perm{0, 1, 2, 3, 4};
      do {
        EXPECT_NEAR(exact_deletion_sum(inst, perm), simulated_deletion_sum(inst, perm), 1e-12);
        EXPECT_NEAR(exact_insertion_sum(inst, perm), simulated_insertion_sum(inst, perm), 1e-12);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
}

TEST(Theory, InvalidOrderingAndInstance) {
  const auto inst = example(Regime::kZero);
  EXPECT_THROW(exact_deletion_sum(inst, Ordering{0, 0, 1}), std::invalid_argument);
  EXPECT_THROW(exact_deletion_sum(inst, Ordering{0, 1}), std::invalid_argument);
  EXPECT_THROW(exact_deletion_sum(TheoryInstance{{1}, {1}, 0, Regime::kZero}, Ordering{0}), std::invalid_argument);
  TheoryInstance big{std::vector<double>(9, 1.0), std::vector<double>(9, 1.0), 0, Regime::kZero};
  EXPECT_THROW(brute_force_optimal(big), std::invalid_argument);
}

TEST(Theory, BruteForceZeroRegime) {
  const auto v = brute_force_optimal(example(Regime::kZero));
  ASSERT_EQ(v.deletion_optima.size(), 1u);
  EXPECT_EQ(v.deletion_optima[0], (Ordering{2, 0, 1}));
  EXPECT_EQ(format_ordering(v.deletion_optima[0]), "(3,1,2)");
  EXPECT_EQ(v.deletion_value, -1.0);
  EXPECT_EQ(v.deletion_in_contribution, Direction::kDescending);
  EXPECT_EQ(v.insertion_optima, v.deletion_optima);
  EXPECT_EQ(v.insertion_value, 22.0);
}

TEST(Theory, BruteForceUniformRegimeDependsOnWeightsOnly) {
  auto inst = example(Regime::kUniformExpected);
  const auto v = brute_force_optimal(inst);
  ASSERT_EQ(v.deletion_optima.size(), 1u);
  EXPECT_EQ(v.deletion_optima[0], (Ordering{1, 2, 0}));
  EXPECT_EQ(v.deletion_in_weight, Direction::kAscending);
  inst.x = {0.9, 0.05, 0.4};
  EXPECT_EQ(brute_force_optimal(inst).deletion_optima, v.deletion_optima);
}

TEST(Theory, TiesGiveEveryOrdering) {
  const TheoryInstance tied{{1, 2}, {2, 1}, 0.0, Regime::kZero};
  EXPECT_EQ(brute_force_optimal(tied).deletion_optima.size(), 2u);
  const TheoryInstance flat_w{{0.1, 0.5, 0.9}, {1, 1, 1}, 0.0, Regime::kUniformExpected};
  EXPECT_EQ(brute_force_optimal(flat_w).deletion_optima.size(), 6u);
  const TheoryInstance constant{{0.1, 0.5, 0.9}, {0, 0, 0}, 1.0, Regime::kZero};
  const auto v = brute_force_optimal(constant);
  EXPECT_EQ(v.deletion_optima.size(), 6u);
  EXPECT_EQ(v.insertion_optima.size(), 6u);
}

TEST(Theory, RegimesAgreeWhenOrdersCoincide) {
  // x*w and w induce the same order, so both regimes pick orderings from the same family.
  TheoryInstance inst{{0.5, 0.5, 0.5}, {3, 1, 2}, 0.0, Regime::kZero};
  const auto zero = brute_force_optimal(inst);
  inst.regime = Regime::kUniformExpected;
  const auto uniform = brute_force_optimal(inst);
  EXPECT_EQ(zero.deletion_in_contribution, Direction::kDescending);
  EXPECT_EQ(uniform.deletion_in_weight, Direction::kAscending);
  Ordering reversed = zero.deletion_optima[0];
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(uniform.deletion_optima[0], reversed);
}

TEST(Theory, ZeroRegimeInvariantToPositiveRescaling) {
  for (auto inst : random_instances(20, 4, 5)) {
    const auto before = brute_force_optimal(inst).deletion_optima;
    for (auto& w : inst.w) w *= 3.5;
    EXPECT_EQ(brute_force_optimal(inst).deletion_optima, before);
  }
}

TEST(Theory, MonotoneFamily) {
  const std::vector<double> key{0.3, 0.1, 0.2};
  EXPECT_EQ(monotone_family({Ordering{1, 2, 0}}, key), Direction::kAscending);
  EXPECT_EQ(monotone_family({Ordering{0, 2, 1}}, key), Direction::kDescending);
  EXPECT_EQ(monotone_family({Ordering{0, 1, 2}}, key), Direction::kNone);
  const std::vector<double> flat{1, 1};
  EXPECT_EQ(monotone_family({Ordering{0, 1}, Ordering{1, 0}}, flat), Direction::kBoth);
}

TEST(Theory, RandomInstancesAreTieFree) {
  for (auto d : {3u, 4u, 5u}) {
    for (const auto& inst : random_instances(50, d, 1)) {
      auto contrib = inst.x;
      for (std::size_t i = 0; i < d; ++i) contrib[i] *= inst.w[i];
      std::sort(contrib.begin(), contrib.end());
      for (std::size_t i = 1; i < d; ++i) EXPECT_GE(contrib[i] - contrib[i - 1], 1e-3);
      for (double x : inst.x) EXPECT_TRUE(x >= 0.0 && x <= 1.0);
    }
  }
}

TEST(Theory, SuitesPass) {
  const std::vector<std::size_t> dims{3, 4};
  const auto dep = check_baseline_dependence(dims, 20, 2);
  EXPECT_TRUE(dep.passed());
  EXPECT_EQ(dep.zero_direction, Direction::kDescending);
  EXPECT_EQ(dep.uniform_direction, Direction::kAscending);
  EXPECT_GT(dep.baseline_dependent, 0u);
  EXPECT_TRUE(check_insertion_agreement(dims, 20, 2).passed());
  EXPECT_LT(check_trace_agreement(dims, 5, 2).max_abs_error, 1e-9);
}
