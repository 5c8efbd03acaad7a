#include "faithlab/baselines.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include "faithlab/fft.hpp"

namespace faithlab {

std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kZero: return "zero";
    case BaselineKind::kRandomColor: return "random_color";
    case BaselineKind::kUniform: return "uniform";
    case BaselineKind::kNormal: return "normal";
    case BaselineKind::kMean: return "mean";
    case BaselineKind::kLocalMean: return "local_mean";
    case BaselineKind::kMedian: return "median";
    case BaselineKind::kPermutation: return "permutation";
    case BaselineKind::kLocalPermutation: return "local_permutation";
    case BaselineKind::kScrambleMagnitude: return "scramble_magnitude";
    case BaselineKind::kScramblePhase: return "scramble_phase";
    case BaselineKind::kFeatviz: return "featviz";
  }
  throw std::invalid_argument("unknown baseline kind");
}

BaselineKind parse_baseline(std::string_view name) {
  for (auto kind : kAllBaselines) {
    if (baseline_name(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown baseline '" + std::string(name) + "'");
}

bool is_noise_baseline(BaselineKind kind) {
  return kind == BaselineKind::kUniform || kind == BaselineKind::kNormal || kind == BaselineKind::kRandomColor;
}

void clip_unit(std::span<double> values) {
  for (auto& v : values) v = std::clamp(v, 0.0, 1.0);
}

namespace {

Tensor as_image(const Tensor& x) {
  if (x.rank() == 2) return x;
  if (x.rank() == 1) return x.reshaped({1, x.size()});
  throw std::invalid_argument("baseline: expected a 1-D or 2-D input, got shape " + shape_to_string(x.shape()));
}

template <typename Rng>
void shuffle(std::span<std::size_t> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(items[i - 1], items[pick(rng)]);
  }
}

}  // namespace

Tensor scramble_spectrum(const Tensor& image, BaselineKind kind, std::uint64_t seed) {
  if (kind != BaselineKind::kScrambleMagnitude && kind != BaselineKind::kScramblePhase) {
    throw std::invalid_argument("scramble_spectrum: kind must be scramble_magnitude or scramble_phase");
  }
  const Tensor img = as_image(image);
  const std::size_t height = img.shape()[0];
  const std::size_t width = img.shape()[1];
  const Spectrum spectrum = rfft2(img);
  const auto roles = half_plane_roles(height, width);
  std::vector<std::size_t> free_bins;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] == BinRole::kFree) free_bins.push_back(i);
  }
  std::vector<std::size_t> perm = free_bins;
  std::mt19937_64 rng(seed);
  shuffle(perm, rng);

  auto magnitude = spectrum.magnitudes();
  auto phase = spectrum.phases();
  const auto original_magnitude = magnitude;
  const auto original_phase = phase;
  for (std::size_t k = 0; k < free_bins.size(); ++k) {
    if (kind == BaselineKind::kScrambleMagnitude) {
      magnitude[free_bins[k]] = original_magnitude[perm[k]];
    } else {
      phase[free_bins[k]] = original_phase[perm[k]];
    }
  }
  // Real bins keep their signed value.
  Spectrum scrambled = hermitian_from_polar(height, width, magnitude, phase);
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] == BinRole::kReal) scrambled[i] = spectrum[i].real();
  }
  return irfft2(scrambled).reshaped(image.shape());
}

BaselineContext build_context(BaselineKind kind, const Tensor& x, const DatasetStats& stats, std::uint64_t seed,
                              const Tensor* featviz_image, std::size_t local_window) {
  if (local_window < 1) throw std::invalid_argument("build_context: local window must be >= 1");
  BaselineContext ctx{kind, Tensor(x.shape(), 0.0), local_window, seed};
  auto& out = ctx.replacement;
  std::mt19937_64 rng(seed);
  switch (kind) {
    case BaselineKind::kZero:
      break;
    case BaselineKind::kRandomColor: {
      std::uniform_real_distribution<double> color(0.0, 1.0);
      std::fill(out.data().begin(), out.data().end(), color(rng));
      break;
    }
    case BaselineKind::kUniform: {
      std::uniform_real_distribution<double> noise(0.0, 1.0);
      for (auto& v : out.data()) v = noise(rng);
      break;
    }
    case BaselineKind::kNormal: {
      std::normal_distribution<double> noise(0.0, 1.0);
      for (auto& v : out.data()) v = noise(rng);
      clip_unit(out.values());
      break;
    }
    case BaselineKind::kMean:
      std::fill(out.data().begin(), out.data().end(), stats.mean);
      break;
    case BaselineKind::kLocalMean: {
      double total = 0.0;
      for (double v : x.values()) total += v;
      std::fill(out.data().begin(), out.data().end(), total / static_cast<double>(x.size()));
      break;
    }
    case BaselineKind::kMedian:
      std::fill(out.data().begin(), out.data().end(), stats.median);
      break;
    case BaselineKind::kPermutation: {
      std::vector<std::size_t> perm(x.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
      shuffle(perm, rng);
      for (std::size_t i = 0; i < perm.size(); ++i) out[i] = x[perm[i]];
      break;
    }
    case BaselineKind::kLocalPermutation: {
      const Tensor img = as_image(x);
      const std::size_t height = img.shape()[0];
      const std::size_t width = img.shape()[1];
      std::vector<std::size_t> window;
      for (std::size_t r0 = 0; r0 < height; r0 += local_window) {
        for (std::size_t c0 = 0; c0 < width; c0 += local_window) {
          window.clear();
          for (std::size_t r = r0; r < std::min(height, r0 + local_window); ++r) {
            for (std::size_t c = c0; c < std::min(width, c0 + local_window); ++c) window.push_back(r * width + c);
          }
          std::vector<std::size_t> perm = window;
          shuffle(perm, rng);
          for (std::size_t k = 0; k < window.size(); ++k) out[window[k]] = x[perm[k]];
        }
      }
      break;
    }
    case BaselineKind::kScrambleMagnitude:
    case BaselineKind::kScramblePhase:
      out = scramble_spectrum(x, kind, seed);
      clip_unit(out.values());
      break;
    case BaselineKind::kFeatviz:
      if (featviz_image == nullptr) throw std::invalid_argument("build_context: featviz baseline needs an image");
      if (featviz_image->size() != x.size()) {
        throw std::invalid_argument("build_context: featviz image shape " + shape_to_string(featviz_image->shape()) +
                                    " does not match input shape " + shape_to_string(x.shape()));
      }
      for (double v : featviz_image->values()) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("build_context: featviz image must lie in [0, 1]");
      }
      out = featviz_image->reshaped(x.shape());
      break;
  }
  return ctx;
}

void apply_in_place(std::span<double> image, std::span<const std::size_t> subset, const BaselineContext& ctx) {
  if (image.size() != ctx.replacement.size()) throw std::invalid_argument("apply: image does not match context");
  for (auto i : subset) {
    if (i >= image.size()) {
      throw std::out_of_range("apply: index " + std::to_string(i) + " out of range for " +
                              std::to_string(image.size()) + " features");
    }
    image[i] = ctx.replacement[i];
  }
}

Tensor apply(const Tensor& x, std::span<const std::size_t> subset, const BaselineContext& ctx) {
  Tensor out = x;
  apply_in_place(out.values(), subset, ctx);
  return out;
}

bool monotone_nesting_check(const Tensor& x, std::span<const std::size_t> ordering, const PerturbFn& perturb) {
  Tensor previous = perturb(x, ordering.subspan(0, 0));
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    Tensor next = perturb(x, ordering.subspan(0, i + 1));
    for (std::size_t j = 0; j < next.size(); ++j) {
      if (j != ordering[i] && next[j] != previous[j]) return false;
    }
    previous = std::move(next);
  }
  return true;
}

bool monotone_nesting_check(const Tensor& x, std::span<const std::size_t> ordering, const BaselineContext& ctx) {
  return monotone_nesting_check(
      x, ordering, [&ctx](const Tensor& img, std::span<const std::size_t> subset) { return apply(img, subset, ctx); });
}

}  // namespace faithlab
