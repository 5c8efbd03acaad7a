#pragma once

#include <optional>
#include <random>
#include <vector>

#include "faithlab/models.hpp"

namespace faithlab::testing {

// Single-input evaluation that keeps the input alive for the call.
inline Tensor eval1(const ad::Program& program, const Tensor& x) { return ad::evaluate(program, {x}); }

inline Tensor grad1(const ad::Program& program, const Tensor& x, ad::NodeId wrt,
                    std::optional<std::size_t> component = std::nullopt) {
  return ad::gradient(program, {x}, wrt, component);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline DenseLayer random_layer(std::mt19937_64& rng, std::size_t rows, std::size_t cols, Activation act,
                               double scale = 0.5) {
  DenseLayer layer;
  layer.rows = rows;
  layer.cols = cols;
  layer.weights = random_vector(rng, rows * cols, -scale, scale);
  layer.bias = random_vector(rng, cols, -0.1, 0.1);
  layer.activation = act;
  return layer;
}

// rows x cols input, the given hidden widths, then `classes` logits.
inline MLPModel random_mlp(std::mt19937_64& rng, std::size_t rows, std::size_t cols, std::vector<std::size_t> hidden,
                           std::size_t classes) {
  std::vector<DenseLayer> layers;
  std::size_t in = rows * cols;
  for (auto h : hidden) {
    layers.push_back(random_layer(rng, in, h, Activation::kRelu));
    in = h;
  }
  layers.push_back(random_layer(rng, in, classes, Activation::kNone));
  return MLPModel(rows, cols, classes, std::move(layers));
}

}  // namespace faithlab::testing
