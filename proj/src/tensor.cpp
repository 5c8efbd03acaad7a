#include "faithlab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace faithlab {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw std::invalid_argument("tensor shape must have at least one dimension");
  for (auto dim : shape) {
    if (dim == 0) throw std::invalid_argument("tensor dimension must be positive, got " + shape_to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_size(shape_)) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                                shape_to_string(shape_));
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::vector(std::span<const double> values) {
  return Tensor({values.size()}, std::vector<double>(values.begin(), values.end()));
}

namespace {

std::size_t matrix_offset(const Shape& shape, std::size_t row, std::size_t col) {
  if (shape.size() != 2) throw std::invalid_argument("Tensor::at: expected a 2-D tensor, got shape " + shape_to_string(shape));
  if (row >= shape[0] || col >= shape[1]) {
    throw std::out_of_range("Tensor::at: index (" + std::to_string(row) + ", " + std::to_string(col) +
                            ") outside shape " + shape_to_string(shape));
  }
  return row * shape[1] + col;
}

}  // namespace

double& Tensor::at(std::size_t row, std::size_t col) { return data_[matrix_offset(shape_, row, col)]; }

double Tensor::at(std::size_t row, std::size_t col) const { return data_[matrix_offset(shape_, row, col)]; }

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc;
}

double l2_norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

void affine_forward(std::span<const double> x, std::span<const double> weight, std::span<const double> bias,
                    std::span<double> out) {
  const std::size_t cols = out.size();
  for (std::size_t j = 0; j < cols; ++j) out[j] = bias[j];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = weight.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) out[j] += xi * row[j];
  }
}

}  // namespace faithlab
