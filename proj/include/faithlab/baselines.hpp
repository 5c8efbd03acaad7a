#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "faithlab/dataset.hpp"
#include "faithlab/tensor.hpp"

namespace faithlab {

enum class BaselineKind {
  kZero,
  kRandomColor,
  kUniform,
  kNormal,
  kMean,
  kLocalMean,
  kMedian,
  kPermutation,
  kLocalPermutation,
  kScrambleMagnitude,
  kScramblePhase,
  kFeatviz,
};

inline constexpr std::array<BaselineKind, 11> kStaticBaselines = {
    BaselineKind::kZero,        BaselineKind::kRandomColor,      BaselineKind::kUniform,
    BaselineKind::kNormal,      BaselineKind::kMean,             BaselineKind::kLocalMean,
    BaselineKind::kMedian,      BaselineKind::kPermutation,      BaselineKind::kLocalPermutation,
    BaselineKind::kScrambleMagnitude, BaselineKind::kScramblePhase};

inline constexpr std::array<BaselineKind, 12> kAllBaselines = {
    BaselineKind::kZero,        BaselineKind::kRandomColor,      BaselineKind::kUniform,
    BaselineKind::kNormal,      BaselineKind::kMean,             BaselineKind::kLocalMean,
    BaselineKind::kMedian,      BaselineKind::kPermutation,      BaselineKind::kLocalPermutation,
    BaselineKind::kScrambleMagnitude, BaselineKind::kScramblePhase, BaselineKind::kFeatviz};

std::string_view baseline_name(BaselineKind kind);
BaselineKind parse_baseline(std::string_view name);
bool is_noise_baseline(BaselineKind kind);

// Everything needed to apply a baseline to one image deterministically: the
// fully-replaced image is materialized once, and removing a feature copies its
// value from there.
struct BaselineContext {
  BaselineKind kind = BaselineKind::kZero;
  Tensor replacement;
  std::size_t local_window = 4;
  std::uint64_t seed = 0;
};

// x is a [rows, cols] image (a rank-1 input is treated as a single row).
// featviz_image is required for BaselineKind::kFeatviz and ignored otherwise.
BaselineContext build_context(BaselineKind kind, const Tensor& x, const DatasetStats& stats, std::uint64_t seed,
                              const Tensor* featviz_image = nullptr, std::size_t local_window = 4);

// x with every index in `subset` replaced by the context's baseline value.
Tensor apply(const Tensor& x, std::span<const std::size_t> subset, const BaselineContext& ctx);
void apply_in_place(std::span<double> image, std::span<const std::size_t> subset, const BaselineContext& ctx);

using PerturbFn = std::function<Tensor(const Tensor&, std::span<const std::size_t>)>;

// True iff consecutive prefixes of `ordering` produce images that differ only
// at the newly added index.
bool monotone_nesting_check(const Tensor& x, std::span<const std::size_t> ordering, const PerturbFn& perturb);
bool monotone_nesting_check(const Tensor& x, std::span<const std::size_t> ordering, const BaselineContext& ctx);

// Spectral scramble before clipping: permutes magnitudes (kScrambleMagnitude) or
// phases (kScramblePhase) among the free half-plane coefficients.
Tensor scramble_spectrum(const Tensor& image, BaselineKind kind, std::uint64_t seed);

void clip_unit(std::span<double> values);

}  // namespace faithlab
