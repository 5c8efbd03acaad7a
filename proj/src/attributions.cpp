#include "faithlab/attributions.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "faithlab/rng.hpp"

namespace faithlab {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kSaliency: return "saliency";
    case Method::kGradientInput: return "gradient_input";
    case Method::kSmoothGrad: return "smoothgrad";
    case Method::kIntegratedGradients: return "integrated_gradients";
    case Method::kOcclusion: return "occlusion";
    case Method::kRise: return "rise";
  }
  throw std::invalid_argument("unknown method");
}

Method parse_method(std::string_view name) {
  for (auto m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown attribution method '" + std::string(name) + "'");
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

Explanation Explanation::from_scores(std::vector<double> scores) {
  Explanation out;
  out.ordering = descending_order(scores);
  out.scores = std::move(scores);
  return out;
}

void AttributionConfig::validate() const {
  if (smoothgrad_samples < 1) throw std::invalid_argument("attribution config: smoothgrad sample count must be >= 1");
  if (!(smoothgrad_sigma >= 0.0)) throw std::invalid_argument("attribution config: smoothgrad sigma must be >= 0");
  if (ig_steps < 1) throw std::invalid_argument("attribution config: integrated gradients steps must be >= 1");
  if (occlusion_patch < 1) throw std::invalid_argument("attribution config: occlusion patch must be >= 1");
  if (rise_masks < 1) throw std::invalid_argument("attribution config: rise mask count must be >= 1");
  if (!(rise_probability > 0.0 && rise_probability < 1.0)) {
    throw std::invalid_argument("attribution config: rise probability must lie in (0, 1)");
  }
}

namespace {

// Gradient of one logit of the model, evaluated at arbitrary points.
class LogitGradient {
 public:
  LogitGradient(const Model& model, std::size_t target)
      : program_(to_program(model)), leaf_(program_.find_input("x")), target_(target) {}

  std::vector<double> at(std::span<const double> point) const {
    const Tensor z({point.size()}, std::vector<double>(point.begin(), point.end()));
    return ad::gradient(program_, {std::cref(z)}, leaf_, target_).data();
  }

 private:
  ad::Program program_;
  ad::NodeId leaf_;
  std::size_t target_;
};

std::size_t target_class(const Model& model, std::span<const double> x) {
  if (x.size() != input_dim(model)) {
    throw std::invalid_argument("attribution: model expects " + std::to_string(input_dim(model)) +
                                " features, got " + std::to_string(x.size()));
  }
  return predicted_class(model, x);
}

double target_logit(const Model& model, std::span<const double> x, std::size_t target) {
  return predict(model, x)[target];
}

std::pair<std::size_t, std::size_t> grid_shape(const Model& model) {
  if (const auto* mlp = std::get_if<MLPModel>(&model)) return {mlp->height(), mlp->width()};
  return {1, input_dim(model)};
}

std::uint64_t method_seed(const AttributionConfig& cfg, Method method) {
  return derive_seed(cfg.seed, {static_cast<std::uint64_t>(method) + 1});
}

}  // namespace

Explanation saliency(const Model& model, std::span<const double> x, const AttributionConfig& cfg) {
  const auto target = target_class(model, x);
  auto grad = LogitGradient(model, target).at(x);
  if (cfg.absolute) {
    for (auto& v : grad) v = std::abs(v);
  }
  return Explanation::from_scores(std::move(grad));
}

Explanation gradient_input(const Model& model, std::span<const double> x, const AttributionConfig&) {
  const auto target = target_class(model, x);
  auto grad = LogitGradient(model, target).at(x);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= x[i];
  return Explanation::from_scores(std::move(grad));
}

Explanation smoothgrad(const Model& model, std::span<const double> x, const AttributionConfig& cfg) {
  cfg.validate();
  const auto target = target_class(model, x);
  const LogitGradient grad(model, target);
  std::mt19937_64 rng(method_seed(cfg, Method::kSmoothGrad));
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> mean(x.size(), 0.0);
  std::vector<double> point(x.size());
  for (std::size_t n = 0; n < cfg.smoothgrad_samples; ++n) {
    for (std::size_t i = 0; i < x.size(); ++i) point[i] = x[i] + cfg.smoothgrad_sigma * noise(rng);
    const auto g = grad.at(point);
    // Running mean: stays exact when every sample agrees.
    const double inv = 1.0 / static_cast<double>(n + 1);
    for (std::size_t i = 0; i < x.size(); ++i) mean[i] += (g[i] - mean[i]) * inv;
  }
  return Explanation::from_scores(std::move(mean));
}

Explanation integrated_gradients(const Model& model, std::span<const double> x, const AttributionConfig& cfg) {
  cfg.validate();
  const auto target = target_class(model, x);
  std::vector<double> reference = cfg.ig_reference;
  if (reference.empty()) reference.assign(x.size(), 0.0);
  if (reference.size() != x.size()) throw std::invalid_argument("integrated_gradients: reference size mismatch");
  const LogitGradient grad(model, target);
  const std::size_t m = cfg.ig_steps;
  // The integrand is the gradient of alpha -> f(x0 + alpha (x - x0)) with respect
  // to x, which carries a factor alpha from the chain rule.
  std::vector<double> integral(x.size(), 0.0);
  std::vector<double> point(x.size());
  const std::size_t last = cfg.ig_rule == IgRule::kTrapezoid ? m : m - 1;
  for (std::size_t k = 0; k <= last; ++k) {
    const double alpha = static_cast<double>(k) / static_cast<double>(m);
    double weight = 1.0 / static_cast<double>(m);
    if (cfg.ig_rule == IgRule::kTrapezoid && (k == 0 || k == m)) weight *= 0.5;
    if (alpha == 0.0) continue;
    for (std::size_t i = 0; i < x.size(); ++i) point[i] = reference[i] + alpha * (x[i] - reference[i]);
    const auto g = grad.at(point);
    for (std::size_t i = 0; i < x.size(); ++i) integral[i] += weight * alpha * g[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) integral[i] *= x[i] - reference[i];
  return Explanation::from_scores(std::move(integral));
}

Explanation occlusion(const Model& model, std::span<const double> x, const AttributionConfig& cfg) {
  cfg.validate();
  const auto target = target_class(model, x);
  const auto [height, width] = grid_shape(model);
  const std::size_t p = cfg.occlusion_patch;
  const double reference = target_logit(model, x, target);
  std::vector<double> scores(x.size(), 0.0);
  std::vector<double> occluded(x.begin(), x.end());
  for (std::size_t r0 = 0; r0 < height; r0 += p) {
    for (std::size_t c0 = 0; c0 < width; c0 += p) {
      const std::size_t r1 = std::min(height, r0 + p);
      const std::size_t c1 = std::min(width, c0 + p);
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) occluded[r * width + c] = cfg.occlusion_fill;
      }
      const double score = reference - target_logit(model, occluded, target);
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) {
          scores[r * width + c] = score;
          occluded[r * width + c] = x[r * width + c];
        }
      }
    }
  }
  return Explanation::from_scores(std::move(scores));
}

RiseEstimate rise_estimate(const Model& model, std::span<const double> x, const AttributionConfig& cfg) {
  cfg.validate();
  const auto target = target_class(model, x);
  const std::size_t d = x.size();
  std::mt19937_64 rng(method_seed(cfg, Method::kRise));
  std::bernoulli_distribution keep(cfg.rise_probability);
  std::vector<double> sum(d, 0.0);
  std::vector<double> sum_sq(d, 0.0);
  std::vector<std::size_t> hits(d, 0);
  std::vector<char> mask(d);
  std::vector<double> masked(d);
  for (std::size_t n = 0; n < cfg.rise_masks; ++n) {
    for (std::size_t i = 0; i < d; ++i) {
      mask[i] = keep(rng) ? 1 : 0;
      masked[i] = mask[i] ? x[i] : 0.0;
    }
    const double value = target_logit(model, masked, target);
    for (std::size_t i = 0; i < d; ++i) {
      if (!mask[i]) continue;
      sum[i] += value;
      sum_sq[i] += value * value;
      ++hits[i];
    }
  }
  RiseEstimate out;
  std::vector<double> scores(d, 0.0);
  out.standard_error.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    if (hits[i] == 0) {
      ++out.uncovered;
      continue;
    }
    const double n = static_cast<double>(hits[i]);
    scores[i] = sum[i] / n;
    if (hits[i] > 1) {
      const double variance = std::max(0.0, (sum_sq[i] - n * scores[i] * scores[i]) / (n - 1.0));
      out.standard_error[i] = std::sqrt(variance / n);
    }
  }
  if (out.uncovered > 0) {
    std::cerr << "warning: rise: " << out.uncovered << " of " << d
              << " features were never kept by any mask; their score is 0\n";
  }
  out.explanation = Explanation::from_scores(std::move(scores));
  return out;
}

Explanation rise(const Model& model, std::span<const double> x, const AttributionConfig& cfg) {
  return rise_estimate(model, x, cfg).explanation;
}

Explanation explain(Method method, const Model& model, std::span<const double> x, const AttributionConfig& cfg) {
  switch (method) {
    case Method::kSaliency: return saliency(model, x, cfg);
    case Method::kGradientInput: return gradient_input(model, x, cfg);
    case Method::kSmoothGrad: return smoothgrad(model, x, cfg);
    case Method::kIntegratedGradients: return integrated_gradients(model, x, cfg);
    case Method::kOcclusion: return occlusion(model, x, cfg);
    case Method::kRise: return rise(model, x, cfg);
  }
  throw std::invalid_argument("explain: unknown method");
}

Explanation linear_closed_form(Method method, std::span<const double> w, double b, std::span<const double> x,
                               double q) {
  if (w.size() != x.size()) throw std::invalid_argument("linear_closed_form: w and x differ in length");
  std::vector<double> scores(w.size());
  switch (method) {
    case Method::kSaliency:
    case Method::kSmoothGrad:
      scores.assign(w.begin(), w.end());
      break;
    case Method::kGradientInput:
    case Method::kOcclusion:
      for (std::size_t i = 0; i < w.size(); ++i) scores[i] = x[i] * w[i];
      break;
    case Method::kIntegratedGradients:
      for (std::size_t i = 0; i < w.size(); ++i) scores[i] = 0.5 * x[i] * w[i];
      break;
    case Method::kRise: {
      const double xw = dot(x, w);
      for (std::size_t i = 0; i < w.size(); ++i) scores[i] = b + q * xw + (1.0 - q) * x[i] * w[i];
      break;
    }
  }
  return Explanation::from_scores(std::move(scores));
}

}  // namespace faithlab
