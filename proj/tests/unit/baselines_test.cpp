#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "faithlab/baselines.hpp"
#include "faithlab/fft.hpp"
#include "support.hpp"

using namespace faithlab;

namespace {

Tensor random_image(std::uint64_t seed, std::size_t h = 8, std::size_t w = 8) {
  std::mt19937_64 rng(seed);
  return Tensor({h, w}, faithlab::testing::random_vector(rng, h * w, 0.0, 1.0));
}

const DatasetStats kStats{0.5, 0.25};

}  // namespace

TEST(Baselines, NamesRoundTrip) {
  for (auto b : kAllBaselines) EXPECT_EQ(parse_baseline(baseline_name(b)), b);
  EXPECT_THROW(parse_baseline("blur"), std::invalid_argument);
}

TEST(Baselines, ZeroBaseline) {
  const Tensor x = Tensor::vector({0.2, 0.7});
  const auto ctx = build_context(BaselineKind::kZero, x, kStats, 0);
  EXPECT_EQ(ctx.replacement.data(), (std::vector<double>{0, 0}));
  const std::vector<std::size_t> u{1};
  EXPECT_EQ(apply(x, u, ctx).data(), (std::vector<double>{0.2, 0.0}));
}

TEST(Baselines, MeanAndMedianUseDatasetStats) {
  const Tensor x = Tensor::vector({0.2, 0.7});
  const std::vector<std::size_t> u{0};
  EXPECT_EQ(apply(x, u, build_context(BaselineKind::kMean, x, kStats, 0)).data(), (std::vector<double>{0.5, 0.7}));
  EXPECT_EQ(apply(x, u, build_context(BaselineKind::kMedian, x, kStats, 0)).data(), (std::vector<double>{0.25, 0.7}));
}

TEST(Baselines, LocalMeanIsTheImageMean) {
  Tensor x({2, 2}, std::vector<double>{0.1, 0.3, 0.5, 0.58});
  const auto ctx = build_context(BaselineKind::kLocalMean, x, kStats, 0);
  for (double v : ctx.replacement.data()) EXPECT_NEAR(v, 0.37, 1e-15);
}

TEST(Baselines, PermutationOfConstantImageIsIdentity) {
  const Tensor x({4, 4}, 0.3);
  for (auto kind : {BaselineKind::kPermutation, BaselineKind::kLocalPermutation}) {
    EXPECT_EQ(build_context(kind, x, kStats, 5).replacement, x);
  }
}

TEST(Baselines, PermutationsShuffleValues) {
  const Tensor x = random_image(1);
  for (auto kind : {BaselineKind::kPermutation, BaselineKind::kLocalPermutation}) {
    auto a = x.data();
    auto b = build_context(kind, x, kStats, 5).replacement.data();
    EXPECT_NE(a, b);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
}

TEST(Baselines, LocalPermutationStaysInsideWindows) {
  const Tensor x = random_image(2);
  const auto r = build_context(BaselineKind::kLocalPermutation, x, kStats, 3, nullptr, 4).replacement;
  for (std::size_t br = 0; br < 8; br += 4) {
    for (std::size_t bc = 0; bc < 8; bc += 4) {
      std::vector<double> a, b;
      for (std::size_t i = br; i < br + 4; ++i) {
        for (std::size_t j = bc; j < bc + 4; ++j) {
          a.push_back(x.at(i, j));
          b.push_back(r.at(i, j));
        }
      }
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      EXPECT_EQ(a, b);
    }
  }
}

TEST(Baselines, NoiseIsInUnitRangeAndSampledOnce) {
  const Tensor x = random_image(3);
  for (auto kind : {BaselineKind::kUniform, BaselineKind::kNormal, BaselineKind::kRandomColor}) {
    const auto ctx = build_context(kind, x, kStats, 11);
    for (double v : ctx.replacement.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(ctx.replacement, build_context(kind, x, kStats, 11).replacement);
    EXPECT_NE(ctx.replacement, build_context(kind, x, kStats, 12).replacement);
  }
  const auto color = build_context(BaselineKind::kRandomColor, x, kStats, 4).replacement.data();
  EXPECT_TRUE(std::all_of(color.begin(), color.end(), [&](double v) { return v == color[0]; }));
}

TEST(Baselines, BoundarySubsetsAndIdempotence) {
  const Tensor x = random_image(4);
  std::vector<std::size_t> all(x.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  for (auto kind : kStaticBaselines) {
    const auto ctx = build_context(kind, x, kStats, 8);
    EXPECT_EQ(apply(x, {}, ctx), x);
    EXPECT_EQ(apply(x, all, ctx).data(), ctx.replacement.data());
    const std::vector<std::size_t> u{3, 17, 40};
    const auto once = apply(x, u, ctx);
    EXPECT_EQ(apply(once, u, ctx), once);
  }
}

TEST(Baselines, OutOfRangeIndexThrows) {
  const Tensor x = Tensor::vector({0.2, 0.7});
  const auto ctx = build_context(BaselineKind::kZero, x, kStats, 0);
  const std::vector<std::size_t> u{2};
  EXPECT_THROW(apply(x, u, ctx), std::out_of_range);
}

TEST(Baselines, NestingHoldsForFixedContexts) {
  const Tensor x = random_image(5);
  const Tensor featviz = random_image(6);
  std::vector<std::size_t> ordering(x.size());
  for (std::size_t i = 0; i < ordering.size(); ++i) ordering[i] = (i * 37) % ordering.size();
  for (auto kind : kAllBaselines) {
    const auto ctx = build_context(kind, x, kStats, 9, &featviz);
    EXPECT_TRUE(monotone_nesting_check(x, ordering, ctx)) << baseline_name(kind);
  }
}

TEST(Baselines, FreshNoisePerStepBreaksNesting) {
  const Tensor x = random_image(7);
  std::vector<std::size_t> ordering(x.size());
  for (std::size_t i = 0; i < ordering.size(); ++i) ordering[i] = i;
  std::uint64_t calls = 0;
  PerturbFn fresh = [&](const Tensor& img, std::span<const std::size_t> subset) {
    const auto ctx = build_context(BaselineKind::kUniform, img, kStats, ++calls);
    return apply(img, subset, ctx);
  };
  EXPECT_FALSE(monotone_nesting_check(x, ordering, fresh));
}

TEST(Baselines, FeatvizNeedsAValidImage) {
  const Tensor x = random_image(8);
  EXPECT_THROW(build_context(BaselineKind::kFeatviz, x, kStats, 0), std::invalid_argument);
  Tensor bad({8, 8}, 1.5);
  EXPECT_THROW(build_context(BaselineKind::kFeatviz, x, kStats, 0, &bad), std::invalid_argument);
  const Tensor good = random_image(9);
  EXPECT_EQ(build_context(BaselineKind::kFeatviz, x, kStats, 0, &good).replacement.data(), good.data());
}

TEST(Baselines, ScramblePhaseKeepsMagnitudes) {
  const Tensor x = random_image(10, 8, 7);
  const auto before = rfft2(x).magnitudes();
  const auto after = rfft2(scramble_spectrum(x, BaselineKind::kScramblePhase, 3)).magnitudes();
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(before[i], after[i], 1e-6);
}

TEST(Baselines, ScrambleMagnitudeKeepsMultisetAndPhases) {
  const Tensor x = random_image(11, 6, 8);
  const auto s0 = rfft2(x);
  const auto s1 = rfft2(scramble_spectrum(x, BaselineKind::kScrambleMagnitude, 4));
  auto m0 = s0.magnitudes();
  auto m1 = s1.magnitudes();
  for (std::size_t i = 0; i < s0.size(); ++i) {
    if (m1[i] > 1e-9) {
      const double diff = std::remainder(s0.phase(i) - s1.phase(i), 2.0 * std::acos(-1.0));
      EXPECT_NEAR(diff, 0.0, 1e-6) << i;
    }
  }
  // Only free bins are permuted; mirrored columns duplicate them, so compare the free set.
  const auto roles = half_plane_roles(6, 8);
  std::vector<double> f0, f1;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] == BinRole::kFree) {
      f0.push_back(m0[i]);
      f1.push_back(m1[i]);
    } else if (roles[i] == BinRole::kReal) {
      EXPECT_NEAR(s0[i].real(), s1[i].real(), 1e-9);
    }
  }
  std::sort(f0.begin(), f0.end());
  std::sort(f1.begin(), f1.end());
  ASSERT_FALSE(f0.empty());
  for (std::size_t i = 0; i < f0.size(); ++i) EXPECT_NEAR(f0[i], f1[i], 1e-6);
  EXPECT_GT(max_abs_diff(x.data(), scramble_spectrum(x, BaselineKind::kScrambleMagnitude, 4).data()), 1e-3);
}

TEST(Baselines, ContextsAreDeterministic) {
  const Tensor x = random_image(12);
  for (auto kind : kStaticBaselines) {
    EXPECT_EQ(build_context(kind, x, kStats, 21).replacement, build_context(kind, x, kStats, 21).replacement);
  }
}
