#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "faithlab/autodiff.hpp"
#include "faithlab/models.hpp"
#include "faithlab/tensor.hpp"

namespace faithlab {

// Fixed Fourier magnitude over the half-plane layout of a height x width image.
struct MagnitudeSpectrum {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
};

// Elementwise mean of |rfft2(x)| over a [count, rows, cols] image stack.
MagnitudeSpectrum mean_magnitude_spectrum(const Tensor& images);

// ||f_l(irfft2(r e^{i phase}))||^2 as a program with one input leaf "phase".
ad::Program objective_program(const MLPModel& model, const MagnitudeSpectrum& magnitude);
double objective(const MLPModel& model, const MagnitudeSpectrum& magnitude, std::span<const double> phase);
std::vector<double> objective_gradient(const MLPModel& model, const MagnitudeSpectrum& magnitude,
                                       std::span<const double> phase);

struct FeatVizConfig {
  std::size_t max_steps = 512;
  double learning_rate = 0.05;  // largest per-coefficient phase change per step, radians
  double threshold = 1e-6;      // stop once the relative decrease of a step falls below this
  std::size_t max_halvings = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FeatVizResult {
  std::vector<double> phase;
  Tensor raw_image;  // before clipping
  Tensor image;      // clipped to [0, 1]
  std::vector<double> objective_trace;
  double clip_fraction = 0.0;
  std::size_t steps = 0;
};

// Normalized gradient descent on the phase from a uniform(-pi, pi) start; a step
// that would raise the objective is halved and retried.
FeatVizResult optimize_baseline(const MLPModel& model, const MagnitudeSpectrum& magnitude,
                                const FeatVizConfig& cfg = {});

// Binary PGM (P5, maxval 255) of a [rows, cols] image with values in [0, 1].
void write_pgm(const Tensor& image, const std::filesystem::path& path);
Tensor read_pgm(const std::filesystem::path& path);

// {"shape": [...], "data": [...]} with 17 significant digits.
void write_tensor_json(const Tensor& tensor, const std::filesystem::path& path);
Tensor read_tensor_json(const std::filesystem::path& path);

}  // namespace faithlab
