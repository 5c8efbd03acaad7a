#include "faithlab/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace faithlab {

void DenseLayer::validate(std::size_t index) const {
  const std::string where = "layers[" + std::to_string(index) + "]";
  if (rows == 0 || cols == 0) throw std::invalid_argument(where + ": rows and cols must be positive");
  if (weights.size() != rows * cols) {
    throw std::invalid_argument(where + ".weights: expected " + std::to_string(rows * cols) + " values, got " +
                                std::to_string(weights.size()));
  }
  if (bias.size() != cols) {
    throw std::invalid_argument(where + ".bias: expected " + std::to_string(cols) + " values, got " +
                                std::to_string(bias.size()));
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(weights.begin(), weights.end(), finite) || !std::all_of(bias.begin(), bias.end(), finite)) {
    throw std::invalid_argument(where + ": non-finite parameter");
  }
}

void LinearModel::validate() const {
  if (weights.empty()) throw std::invalid_argument("linear model needs at least one weight");
  if (!std::all_of(weights.begin(), weights.end(), [](double v) { return std::isfinite(v); }) ||
      !std::isfinite(bias)) {
    throw std::invalid_argument("linear model has a non-finite parameter");
  }
}

MLPModel::MLPModel(std::size_t height, std::size_t width, std::size_t classes, std::vector<DenseLayer> layers)
    : height_(height), width_(width), classes_(classes), layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("mlp: at least one layer is required");
  if (height_ == 0 || width_ == 0 || classes_ == 0) throw std::invalid_argument("mlp: empty input or class count");
  std::size_t expected_rows = height_ * width_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    layer.validate(i);
    if (layer.rows != expected_rows) {
      throw std::invalid_argument("layers[" + std::to_string(i) + "].rows: expected " +
                                  std::to_string(expected_rows) + ", got " + std::to_string(layer.rows));
    }
    const bool last = i + 1 == layers_.size();
    if (last && layer.activation != Activation::kNone) {
      throw std::invalid_argument("layers[" + std::to_string(i) + "].activation: final layer must be linear");
    }
    if (!last && layer.activation != Activation::kRelu) {
      throw std::invalid_argument("layers[" + std::to_string(i) + "].activation: hidden layers must use relu");
    }
    expected_rows = layer.cols;
  }
  if (layers_.back().cols != classes_) {
    throw std::invalid_argument("layers[" + std::to_string(layers_.size() - 1) + "].cols: expected " +
                                std::to_string(classes_) + " classes, got " + std::to_string(layers_.back().cols));
  }
}

namespace {

void check_input(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw std::invalid_argument("model expects " + std::to_string(expected) + " input features, got " +
                                std::to_string(got));
  }
}

std::vector<double> apply_layer(const DenseLayer& layer, std::span<const double> x) {
  std::vector<double> out(layer.cols);
  affine_forward(x, layer.weights, layer.bias, out);
  if (layer.activation == Activation::kRelu) {
    for (auto& v : out) v = v > 0.0 ? v : 0.0;
  }
  return out;
}

}  // namespace

Forward MLPModel::forward_with_features(std::span<const double> x) const {
  check_input(input_dim(), x.size());
  std::vector<double> current(x.begin(), x.end());
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) current = apply_layer(layers_[i], current);
  Forward out;
  out.logits = apply_layer(layers_.back(), current);
  out.penultimate = std::move(current);
  return out;
}

std::vector<double> MLPModel::logits(std::span<const double> x) const { return forward_with_features(x).logits; }

std::vector<double> MLPModel::features(std::span<const double> x) const {
  return forward_with_features(x).penultimate;
}

std::vector<double> MLPModel::head(std::span<const double> features) const {
  check_input(feature_dim(), features.size());
  return apply_layer(layers_.back(), features);
}

std::size_t input_dim(const Model& model) {
  return std::visit([](const auto& m) { return m.input_dim(); }, model);
}

std::size_t class_count(const Model& model) {
  if (const auto* mlp = std::get_if<MLPModel>(&model)) return mlp->classes();
  return 1;
}

std::vector<double> predict(const Model& model, std::span<const double> x) {
  if (const auto* linear = std::get_if<LinearModel>(&model)) {
    check_input(linear->input_dim(), x.size());
    std::vector<double> out(1);
    const double bias[] = {linear->bias};
    affine_forward(x, linear->weights, bias, out);
    return out;
  }
  return std::get<MLPModel>(model).logits(x);
}

std::size_t predicted_class(const Model& model, std::span<const double> x) {
  const auto logits = predict(model, x);
  return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

ad::Program to_program(const Model& model) {
  ad::Program program;
  if (const auto* linear = std::get_if<LinearModel>(&model)) {
    const auto x = program.input("x", {linear->input_dim()});
    const auto w = program.constant(Tensor({linear->input_dim(), 1}, linear->weights), "w");
    const auto b = program.constant(Tensor({1}, linear->bias), "b");
    program.affine(x, w, b);
    return program;
  }
  const auto& mlp = std::get<MLPModel>(model);
  auto current = program.input("x", {mlp.input_dim()});
  for (const auto& layer : mlp.layers()) {
    const auto w = program.constant(Tensor({layer.rows, layer.cols}, layer.weights));
    const auto b = program.constant(Tensor({layer.cols}, layer.bias));
    current = program.affine(current, w, b);
    if (layer.activation == Activation::kRelu) current = program.relu(current);
  }
  return program;
}

ad::Program feature_program(const MLPModel& model) {
  ad::Program program;
  auto current = program.input("x", {model.input_dim()});
  for (std::size_t i = 0; i + 1 < model.layers().size(); ++i) {
    const auto& layer = model.layers()[i];
    const auto w = program.constant(Tensor({layer.rows, layer.cols}, layer.weights));
    const auto b = program.constant(Tensor({layer.cols}, layer.bias));
    current = program.relu(program.affine(current, w, b));
  }
  program.set_output(current);
  return program;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning rate must be positive");
  if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train config: batch size must be >= 1");
  if (l2 < 0.0) throw std::invalid_argument("train config: l2 penalty must be non-negative");
}

namespace {

double cross_entropy(std::span<const double> logits, std::size_t label, std::vector<double>* softmax_out) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double v : logits) total += std::exp(v - peak);
  if (softmax_out != nullptr) {
    softmax_out->resize(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) (*softmax_out)[k] = std::exp(logits[k] - peak) / total;
  }
  return -(logits[label] - peak - std::log(total));
}

}  // namespace

double accuracy(const Model& model, const Dataset& data) {
  if (data.count() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.count(); ++i) hits += predicted_class(model, data.image(i)) == data.labels[i];
  return static_cast<double>(hits) / static_cast<double>(data.count());
}

TrainResult train_sgd(const Architecture& arch, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.count() == 0) throw std::invalid_argument("train_sgd: empty dataset");
  if (data.labels.size() != data.count()) throw std::invalid_argument("train_sgd: label count mismatch");
  if (data.pixels() != arch.height * arch.width) {
    throw std::invalid_argument("train_sgd: dataset images do not match the architecture input shape");
  }
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    if (data.labels[i] >= arch.classes) {
      throw std::invalid_argument("train_sgd: label " + std::to_string(data.labels[i]) + " of sample " +
                                  std::to_string(i) + " is outside [0, " + std::to_string(arch.classes) + ")");
    }
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> widths{arch.height * arch.width};
  widths.insert(widths.end(), arch.hidden.begin(), arch.hidden.end());
  widths.push_back(arch.classes);

  // He-uniform initialization, zero biases.
  std::vector<Tensor> params;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(widths[l]));
    std::uniform_real_distribution<double> init(-limit, limit);
    Tensor w({widths[l], widths[l + 1]});
    for (auto& v : w.data()) v = init(rng);
    params.push_back(std::move(w));
    params.emplace_back(Shape{widths[l + 1]}, 0.0);
  }

  ad::Program program;
  const auto x = program.input("x", {widths.front()});
  auto current = x;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto w = program.input("w" + std::to_string(l), {widths[l], widths[l + 1]});
    const auto b = program.input("b" + std::to_string(l), {widths[l + 1]});
    current = program.affine(current, w, b);
    if (l + 2 < widths.size()) current = program.relu(current);
  }

  auto snapshot = [&]() {
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      DenseLayer layer{widths[l], widths[l + 1], params[2 * l].data(), params[2 * l + 1].data(),
                       l + 2 < widths.size() ? Activation::kRelu : Activation::kNone};
      layers.push_back(std::move(layer));
    }
    return MLPModel(arch.height, arch.width, arch.classes, std::move(layers));
  };

  auto full_pass_loss = [&](const MLPModel& model) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.count(); ++i) total += cross_entropy(model.logits(data.image(i)), data.labels[i], nullptr);
    return total / static_cast<double>(data.count());
  };

  std::vector<std::size_t> order(data.count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Tensor> grad_sum;
  for (const auto& p : params) grad_sum.emplace_back(p.shape(), 0.0);
  std::vector<double> probs;
  TrainResult result{snapshot()};

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      for (auto& g : grad_sum) std::fill(g.data().begin(), g.data().end(), 0.0);
      for (std::size_t s = start; s < stop; ++s) {
        const std::size_t idx = order[s];
        const auto px = data.image(idx);
        const Tensor sample({widths.front()}, std::vector<double>(px.begin(), px.end()));
        ad::Inputs inputs{std::cref(sample)};
        for (const auto& p : params) inputs.emplace_back(std::cref(p));
        const Tensor logits = ad::evaluate(program, inputs);
        cross_entropy(logits.values(), data.labels[idx], &probs);
        Tensor seed({arch.classes}, probs);
        seed[data.labels[idx]] -= 1.0;
        const auto grads = ad::vjp(program, inputs, seed);
        for (std::size_t p = 0; p < params.size(); ++p) {
          const auto& g = grads[p + 1];
          auto& acc = grad_sum[p];
          for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += g[k];
        }
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (std::size_t p = 0; p < params.size(); ++p) {
        auto& param = params[p];
        const bool is_weight = p % 2 == 0;
        for (std::size_t k = 0; k < param.size(); ++k) {
          double step = grad_sum[p][k] * scale;
          if (is_weight) step += cfg.l2 * param[k];
          param[k] -= cfg.learning_rate * step;
        }
      }
    }
    result.model = snapshot();
    result.epoch_loss.push_back(full_pass_loss(result.model));
  }
  result.loss = result.epoch_loss.back();
  result.accuracy = accuracy(result.model, data);
  return result;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

void append_array(std::string& out, std::span<const double> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    append_number(out, values[i]);
  }
  out += ']';
}

void append_layer(std::string& out, const DenseLayer& layer) {
  out += "{\"rows\": " + std::to_string(layer.rows) + ", \"cols\": " + std::to_string(layer.cols) + ", \"weights\": ";
  append_array(out, layer.weights);
  out += ", \"bias\": ";
  append_array(out, layer.bias);
  out += std::string(", \"activation\": \"") + (layer.activation == Activation::kRelu ? "relu" : "none") + "\"}";
}

template <typename T>
T field(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw std::invalid_argument("model file: missing field '" + where + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("model file: field '" + where + key + "' has the wrong type");
  }
}

}  // namespace

std::string model_to_json(const Model& model) {
  std::string out = "{";
  if (const auto* linear = std::get_if<LinearModel>(&model)) {
    out += "\"type\": \"linear\", \"input_shape\": [1, " + std::to_string(linear->input_dim()) +
           "], \"classes\": 1, \"layers\": [";
    append_layer(out, DenseLayer{linear->input_dim(), 1, linear->weights, {linear->bias}, Activation::kNone});
  } else {
    const auto& mlp = std::get<MLPModel>(model);
    out += "\"type\": \"mlp\", \"input_shape\": [" + std::to_string(mlp.height()) + ", " +
           std::to_string(mlp.width()) + "], \"classes\": " + std::to_string(mlp.classes()) + ", \"layers\": [";
    for (std::size_t i = 0; i < mlp.layers().size(); ++i) {
      if (i > 0) out += ", ";
      append_layer(out, mlp.layers()[i]);
    }
  }
  out += "]}\n";
  return out;
}

Model model_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("model file: not valid JSON: ") + e.what());
  }
  const auto type = field<std::string>(doc, "type", "");
  const auto shape = field<std::vector<std::size_t>>(doc, "input_shape", "");
  if (shape.size() != 2) throw std::invalid_argument("model file: field 'input_shape' must hold [H, W]");
  const auto classes = field<std::size_t>(doc, "classes", "");
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw std::invalid_argument("model file: missing field 'layers'");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i < doc["layers"].size(); ++i) {
    const auto& j = doc["layers"][i];
    const std::string where = "layers[" + std::to_string(i) + "].";
    DenseLayer layer;
    layer.rows = field<std::size_t>(j, "rows", where);
    layer.cols = field<std::size_t>(j, "cols", where);
    layer.weights = field<std::vector<double>>(j, "weights", where);
    layer.bias = field<std::vector<double>>(j, "bias", where);
    const auto activation = field<std::string>(j, "activation", where);
    if (activation == "relu") {
      layer.activation = Activation::kRelu;
    } else if (activation == "none") {
      layer.activation = Activation::kNone;
    } else {
      throw std::invalid_argument("model file: field '" + where + "activation' must be relu or none");
    }
    layer.validate(i);
    layers.push_back(std::move(layer));
  }
  if (type == "linear") {
    if (layers.size() != 1 || layers[0].cols != 1 || classes != 1) {
      throw std::invalid_argument("model file: field 'layers' of a linear model must hold one [d, 1] layer");
    }
    if (layers[0].rows != shape[0] * shape[1]) {
      throw std::invalid_argument("model file: field 'layers[0].rows' does not match input_shape");
    }
    LinearModel linear{layers[0].weights, layers[0].bias[0]};
    linear.validate();
    return linear;
  }
  if (type == "mlp") return MLPModel(shape[0], shape[1], classes, std::move(layers));
  throw std::invalid_argument("model file: field 'type' must be linear or mlp, got '" + type + "'");
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot write " + path.string());
  out << model_to_json(model);
  if (!out) throw std::runtime_error("save_model: write failed for " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace faithlab
