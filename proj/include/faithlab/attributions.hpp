#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faithlab/models.hpp"

namespace faithlab {

enum class Method { kSaliency, kGradientInput, kSmoothGrad, kIntegratedGradients, kOcclusion, kRise };

inline constexpr std::array<Method, 6> kAllMethods = {Method::kSaliency,            Method::kGradientInput,
                                                      Method::kSmoothGrad,          Method::kIntegratedGradients,
                                                      Method::kOcclusion,           Method::kRise};

std::string_view method_name(Method method);
Method parse_method(std::string_view name);

// Descending order of scores, ties broken by ascending index.
std::vector<std::size_t> descending_order(std::span<const double> scores);

// Per-feature scores plus the deletion ordering they induce.
struct Explanation {
  std::vector<double> scores;
  std::vector<std::size_t> ordering;

  static Explanation from_scores(std::vector<double> scores);
};

enum class IgRule { kTrapezoid, kLeftRiemann };

struct AttributionConfig {
  double smoothgrad_sigma = 0.1;
  std::size_t smoothgrad_samples = 32;
  std::size_t ig_steps = 32;
  IgRule ig_rule = IgRule::kTrapezoid;
  std::vector<double> ig_reference;  // empty means the zero image
  std::size_t occlusion_patch = 1;
  double occlusion_fill = 0.0;
  double rise_probability = 0.5;
  std::size_t rise_masks = 2000;
  bool absolute = false;  // saliency magnitude instead of signed gradient
  std::uint64_t seed = 0;

  void validate() const;
};

// All methods attribute the logit of the class predicted on x (the single
// logit for a LinearModel).
Explanation saliency(const Model& model, std::span<const double> x, const AttributionConfig& cfg = {});
Explanation gradient_input(const Model& model, std::span<const double> x, const AttributionConfig& cfg = {});
Explanation smoothgrad(const Model& model, std::span<const double> x, const AttributionConfig& cfg = {});
Explanation integrated_gradients(const Model& model, std::span<const double> x, const AttributionConfig& cfg = {});
Explanation occlusion(const Model& model, std::span<const double> x, const AttributionConfig& cfg = {});
Explanation rise(const Model& model, std::span<const double> x, const AttributionConfig& cfg = {});

struct RiseEstimate {
  Explanation explanation;
  std::vector<double> standard_error;  // per feature; 0 where fewer than two masks kept it
  std::size_t uncovered = 0;           // features no mask kept
};

RiseEstimate rise_estimate(const Model& model, std::span<const double> x, const AttributionConfig& cfg = {});

Explanation explain(Method method, const Model& model, std::span<const double> x, const AttributionConfig& cfg = {});

// Closed forms for f(x) = x w + b; RISE uses inclusion probability q.
Explanation linear_closed_form(Method method, std::span<const double> w, double b, std::span<const double> x,
                               double q = 0.5);

}  // namespace faithlab
