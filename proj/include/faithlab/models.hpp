#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "faithlab/autodiff.hpp"
#include "faithlab/dataset.hpp"
#include "faithlab/tensor.hpp"

namespace faithlab {

enum class Activation { kNone, kRelu };

// y = x W + b with W row-major [rows, cols].
struct DenseLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::kNone;

  void validate(std::size_t index) const;
};

// f(x) = x w + b, a single logit.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  std::size_t input_dim() const { return weights.size(); }
  void validate() const;
};

struct Forward {
  std::vector<double> logits;
  std::vector<double> penultimate;
};

// Dense layers with ReLU between them; the final layer produces class logits and
// its input is the penultimate feature map.
class MLPModel {
 public:
  MLPModel(std::size_t height, std::size_t width, std::size_t classes, std::vector<DenseLayer> layers);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t input_dim() const { return height_ * width_; }
  std::size_t classes() const { return classes_; }
  std::size_t feature_dim() const { return layers_.back().rows; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  const DenseLayer& final_layer() const { return layers_.back(); }

  std::vector<double> logits(std::span<const double> x) const;
  Forward forward_with_features(std::span<const double> x) const;
  std::vector<double> features(std::span<const double> x) const;
  // Final dense layer applied to a penultimate feature vector.
  std::vector<double> head(std::span<const double> features) const;

 private:
  std::size_t height_;
  std::size_t width_;
  std::size_t classes_;
  std::vector<DenseLayer> layers_;
};

using Model = std::variant<LinearModel, MLPModel>;

std::size_t input_dim(const Model& model);
std::size_t class_count(const Model& model);
// Logits of the model; a single value for a LinearModel.
std::vector<double> predict(const Model& model, std::span<const double> x);
std::size_t predicted_class(const Model& model, std::span<const double> x);

// The model as a differentiable program with one input leaf "x" of shape [d];
// weights are baked in as constants. The output is the logit vector.
ad::Program to_program(const Model& model);
// The model up to the penultimate layer, with "x" as the only input.
ad::Program feature_program(const MLPModel& model);

struct Architecture {
  std::size_t height = 28;
  std::size_t width = 28;
  std::vector<std::size_t> hidden;
  std::size_t classes = 10;
};

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 3;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double l2 = 0.0;

  void validate() const;
};

struct TrainResult {
  MLPModel model;
  double accuracy = 0.0;
  double loss = 0.0;
  std::vector<double> epoch_loss;
};

// Minibatch SGD on softmax cross-entropy. Deterministic given cfg.seed.
TrainResult train_sgd(const Architecture& arch, const Dataset& data, const TrainConfig& cfg);

double accuracy(const Model& model, const Dataset& data);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);

}  // namespace faithlab
