#include "faithlab/featviz.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "faithlab/fft.hpp"
#include "json.hpp"

namespace faithlab {

MagnitudeSpectrum mean_magnitude_spectrum(const Tensor& images) {
  if (images.rank() != 3 || images.shape()[0] == 0) {
    throw std::invalid_argument("mean_magnitude_spectrum: expected a nonempty [count, rows, cols] stack");
  }
  const std::size_t count = images.shape()[0];
  const std::size_t height = images.shape()[1];
  const std::size_t width = images.shape()[2];
  MagnitudeSpectrum out{height, width, std::vector<double>(height * (width / 2 + 1), 0.0)};
  const std::size_t pixels = height * width;
  for (std::size_t n = 0; n < count; ++n) {
    const auto first = images.data().begin() + static_cast<std::ptrdiff_t>(n * pixels);
    const Tensor image({height, width}, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(pixels)));
    const Spectrum spectrum = rfft2(image);
    for (std::size_t k = 0; k < spectrum.size(); ++k) out.values[k] += spectrum.magnitude(k);
  }
  for (auto& v : out.values) v /= static_cast<double>(count);
  return out;
}

ad::Program objective_program(const MLPModel& model, const MagnitudeSpectrum& magnitude) {
  if (magnitude.height != model.height() || magnitude.width != model.width()) {
    throw std::invalid_argument("featviz: magnitude spectrum does not match the model input shape");
  }
  ad::Program program;
  const auto phase = program.input("phase", {magnitude.height, magnitude.width / 2 + 1});
  auto current = program.phase_image(phase, magnitude.height, magnitude.width, magnitude.values);
  for (std::size_t i = 0; i + 1 < model.layers().size(); ++i) {
    const auto& layer = model.layers()[i];
    const auto w = program.constant(Tensor({layer.rows, layer.cols}, layer.weights));
    const auto b = program.constant(Tensor({layer.cols}, layer.bias));
    current = program.relu(program.affine(current, w, b));
  }
  program.squared_norm(current);
  return program;
}

namespace {

Tensor phase_tensor(const MagnitudeSpectrum& magnitude, std::span<const double> phase) {
  return Tensor({magnitude.height, magnitude.width / 2 + 1}, std::vector<double>(phase.begin(), phase.end()));
}

}  // namespace

double objective(const MLPModel& model, const MagnitudeSpectrum& magnitude, std::span<const double> phase) {
  const auto program = objective_program(model, magnitude);
  const Tensor p = phase_tensor(magnitude, phase);
  return ad::evaluate(program, {std::cref(p)})[0];
}

std::vector<double> objective_gradient(const MLPModel& model, const MagnitudeSpectrum& magnitude,
                                       std::span<const double> phase) {
  const auto program = objective_program(model, magnitude);
  const Tensor p = phase_tensor(magnitude, phase);
  return ad::gradient(program, {std::cref(p)}, program.find_input("phase")).data();
}

void FeatVizConfig::validate() const {
  if (max_steps < 1) throw std::invalid_argument("featviz config: max steps must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("featviz config: learning rate must be positive");
  if (!(threshold >= 0.0)) throw std::invalid_argument("featviz config: threshold must be >= 0");
}

FeatVizResult optimize_baseline(const MLPModel& model, const MagnitudeSpectrum& magnitude, const FeatVizConfig& cfg) {
  cfg.validate();
  const auto program = objective_program(model, magnitude);
  const auto leaf = program.find_input("phase");
  Tensor phase({magnitude.height, magnitude.width / 2 + 1});
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> init(-std::numbers::pi, std::numbers::pi);
  for (auto& v : phase.data()) v = init(rng);

  auto eval = [&](const Tensor& p) {
    const double value = ad::evaluate(program, {std::cref(p)})[0];
    if (!std::isfinite(value)) throw std::runtime_error("optimize_baseline: objective became non-finite");
    return value;
  };

  FeatVizResult result;
  double current = eval(phase);
  result.objective_trace.push_back(current);
  Tensor candidate = phase;
  for (std::size_t step = 0; step < cfg.max_steps && current > 0.0; ++step) {
    const Tensor grad = ad::gradient(program, {std::cref(phase)}, leaf);
    double scale = 0.0;
    for (double g : grad.values()) scale = std::max(scale, std::abs(g));
    if (scale == 0.0) break;
    double rate = cfg.learning_rate / scale;
    double next = current;
    bool accepted = false;
    for (std::size_t halving = 0; halving <= cfg.max_halvings; ++halving, rate *= 0.5) {
      for (std::size_t k = 0; k < phase.size(); ++k) candidate[k] = phase[k] - rate * grad[k];
      next = eval(candidate);
      if (next <= current) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    phase = candidate;
    const double decrease = (current - next) / current;
    current = next;
    result.objective_trace.push_back(current);
    result.steps = step + 1;
    if (decrease < cfg.threshold) break;
  }

  result.phase = phase.data();
  result.raw_image = irfft2(hermitian_from_polar(magnitude.height, magnitude.width, magnitude.values, phase.values()));
  result.image = result.raw_image;
  std::size_t clipped = 0;
  for (double v : result.raw_image.values()) clipped += (v < 0.0 || v > 1.0) ? 1 : 0;
  result.clip_fraction = static_cast<double>(clipped) / static_cast<double>(result.raw_image.size());
  for (auto& v : result.image.data()) v = std::clamp(v, 0.0, 1.0);
  return result;
}

void write_pgm(const Tensor& image, const std::filesystem::path& path) {
  if (image.rank() != 2) throw std::invalid_argument("write_pgm: expected a 2-D image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot write " + path.string());
  out << "P5\n" << image.shape()[1] << ' ' << image.shape()[0] << "\n255\n";
  for (double v : image.values()) {
    const auto byte = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    out.put(static_cast<char>(byte));
  }
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path.string());
}

Tensor read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot read " + path.string());
  std::string magic;
  std::size_t width = 0;
  std::size_t height = 0;
  int maxval = 0;
  in >> magic >> width >> height >> maxval;
  in.get();
  if (magic != "P5" || maxval != 255 || width == 0 || height == 0) {
    throw std::runtime_error("read_pgm: " + path.string() + " is not an 8-bit P5 image");
  }
  std::vector<double> data(width * height);
  for (auto& v : data) {
    const int byte = in.get();
    if (byte == EOF) throw std::runtime_error("read_pgm: truncated pixel data in " + path.string());
    v = static_cast<double>(byte) / 255.0;
  }
  return Tensor({height, width}, std::move(data));
}

void write_tensor_json(const Tensor& tensor, const std::filesystem::path& path) {
  std::string out = "{\"shape\": [";
  for (std::size_t i = 0; i < tensor.rank(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(tensor.shape()[i]);
  }
  out += "], \"data\": [";
  char buf[32];
  for (std::size_t i = 0; i < tensor.size(); ++i) {
    if (i > 0) out += ',';
    const auto res = std::to_chars(buf, buf + sizeof(buf), tensor[i], std::chars_format::general, 17);
    out.append(buf, res.ptr);
  }
  out += "]}\n";
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("write_tensor_json: cannot write " + path.string());
  file << out;
}

Tensor read_tensor_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_tensor_json: cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    const auto doc = nlohmann::json::parse(buf.str());
    return Tensor(doc.at("shape").get<Shape>(), doc.at("data").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("read_tensor_json: " + path.string() + ": " + e.what());
  }
}

}  // namespace faithlab
