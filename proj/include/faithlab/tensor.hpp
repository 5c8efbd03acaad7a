#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace faithlab {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Dense row-major array of doubles. Every dimension is >= 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(std::span<const double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t row, std::size_t col);
  double at(std::size_t row, std::size_t col) const;

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  // Same data, new shape. The element count must not change.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double l2_norm(std::span<const double> a);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

// out = x W + bias, W row-major [x.size(), out.size()]. Zero inputs are skipped;
// every dense evaluation in the library goes through this kernel so that
// different code paths agree bitwise.
void affine_forward(std::span<const double> x, std::span<const double> weight, std::span<const double> bias,
                    std::span<double> out);

}  // namespace faithlab
