#include "faithlab/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace faithlab {

namespace {

std::size_t smallest_factor(std::size_t n) {
  for (std::size_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) return p;
  }
  return n;
}

// Mixed-radix decimation in time. Prime lengths fall back to a direct DFT.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n), twiddles_(n) {
    for (std::size_t k = 0; k < n; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = Complex(std::cos(angle), std::sin(angle));
    }
  }

  std::vector<Complex> run(std::span<const Complex> input, bool inverse) const {
    std::vector<Complex> out(n_);
    std::vector<Complex> scratch(n_);
    transform(input.data(), 1, out.data(), n_, inverse, scratch.data());
    return out;
  }

 private:
  Complex twiddle(std::size_t exponent, std::size_t length, bool inverse) const {
    const Complex w = twiddles_[(exponent % length) * (n_ / length)];
    return inverse ? std::conj(w) : w;
  }

  void transform(const Complex* in, std::size_t stride, Complex* out, std::size_t n, bool inverse,
                 Complex* scratch) const {
    if (n == 1) {
      out[0] = in[0];
      return;
    }
    const std::size_t p = smallest_factor(n);
    const std::size_t m = n / p;
    for (std::size_t r = 0; r < p; ++r) {
      transform(in + r * stride, stride * p, out + r * m, m, inverse, scratch);
    }
    for (std::size_t i = 0; i < n; ++i) scratch[i] = out[i];
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t q = 0; q < p; ++q) {
        const std::size_t index = k + q * m;
        Complex acc = 0.0;
        for (std::size_t r = 0; r < p; ++r) acc += scratch[r * m + k] * twiddle(r * index, n, inverse);
        out[index] = acc;
      }
    }
  }

  std::size_t n_;
  std::vector<Complex> twiddles_;
};

void check_image(const Tensor& image, const char* what) {
  if (image.rank() != 2) {
    throw std::invalid_argument(std::string(what) + ": expected a 2-D image, got shape " +
                                shape_to_string(image.shape()));
  }
}

}  // namespace

Spectrum::Spectrum(std::size_t height, std::size_t width)
    : height_(height), width_(width), coefficients_(height * (width / 2 + 1)) {
  if (height == 0 || width == 0) throw std::invalid_argument("spectrum dimensions must be positive");
}

Spectrum::Spectrum(std::size_t height, std::size_t width, std::vector<Complex> coefficients)
    : height_(height), width_(width), coefficients_(std::move(coefficients)) {
  if (height == 0 || width == 0) throw std::invalid_argument("spectrum dimensions must be positive");
  if (coefficients_.size() != height * (width / 2 + 1)) {
    throw std::invalid_argument("spectrum layout mismatch: " + std::to_string(coefficients_.size()) +
                                " coefficients for a " + std::to_string(height) + "x" + std::to_string(width) +
                                " image (expected " + std::to_string(height * (width / 2 + 1)) + ")");
  }
}

Spectrum Spectrum::from_polar(std::size_t height, std::size_t width, std::span<const double> magnitude,
                              std::span<const double> phase) {
  Spectrum out(height, width);
  if (magnitude.size() != out.size() || phase.size() != out.size()) {
    throw std::invalid_argument("from_polar: magnitude/phase length does not match the half-plane layout");
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::polar(magnitude[i], phase[i]);
  return out;
}

std::vector<double> Spectrum::magnitudes() const {
  std::vector<double> out(coefficients_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(coefficients_[i]);
  return out;
}

std::vector<double> Spectrum::phases() const {
  std::vector<double> out(coefficients_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::arg(coefficients_[i]);
  return out;
}

bool Spectrum::self_conjugate_column(std::size_t col) const {
  return col == 0 || (width_ % 2 == 0 && col == width_ / 2);
}

std::vector<BinRole> half_plane_roles(std::size_t height, std::size_t width) {
  const Spectrum layout(height, width);
  std::vector<BinRole> roles(layout.size(), BinRole::kFree);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < layout.half_width(); ++c) {
      if (!layout.self_conjugate_column(c)) continue;
      const std::size_t mirror_row = (height - r) % height;
      auto& role = roles[r * layout.half_width() + c];
      if (mirror_row == r) {
        role = BinRole::kReal;
      } else if (mirror_row < r) {
        role = BinRole::kMirror;
      }
    }
  }
  return roles;
}

std::size_t mirror_source(std::size_t index, std::size_t height, std::size_t width) {
  const std::size_t half = width / 2 + 1;
  const std::size_t r = index / half;
  const std::size_t c = index % half;
  return ((height - r) % height) * half + c;
}

Spectrum hermitian_from_polar(std::size_t height, std::size_t width, std::span<const double> magnitude,
                              std::span<const double> phase) {
  Spectrum out(height, width);
  if (magnitude.size() != out.size() || phase.size() != out.size()) {
    throw std::invalid_argument("hermitian_from_polar: magnitude/phase length does not match the half-plane layout");
  }
  const auto roles = half_plane_roles(height, width);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (roles[i] == BinRole::kFree) out[i] = std::polar(magnitude[i], phase[i]);
    if (roles[i] == BinRole::kReal) out[i] = magnitude[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (roles[i] == BinRole::kMirror) out[i] = std::conj(out[mirror_source(i, height, width)]);
  }
  return out;
}

std::vector<Complex> fft(std::span<const Complex> input) {
  if (input.empty()) throw std::invalid_argument("fft: empty input");
  return FftPlan(input.size()).run(input, false);
}

std::vector<Complex> ifft(std::span<const Complex> input) {
  if (input.empty()) throw std::invalid_argument("ifft: empty input");
  auto out = FftPlan(input.size()).run(input, true);
  const double scale = 1.0 / static_cast<double>(input.size());
  for (auto& v : out) v *= scale;
  return out;
}

Spectrum rfft2(const Tensor& image) {
  check_image(image, "rfft2");
  const std::size_t height = image.shape()[0];
  const std::size_t width = image.shape()[1];
  Spectrum out(height, width);
  const std::size_t half = out.half_width();
  const FftPlan row_plan(width);
  const FftPlan col_plan(height);

  std::vector<Complex> row(width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) row[c] = image.at(r, c);
    const auto transformed = row_plan.run(row, false);
    for (std::size_t c = 0; c < half; ++c) out.at(r, c) = transformed[c];
  }
  std::vector<Complex> column(height);
  for (std::size_t c = 0; c < half; ++c) {
    for (std::size_t r = 0; r < height; ++r) column[r] = out.at(r, c);
    const auto transformed = col_plan.run(column, false);
    for (std::size_t r = 0; r < height; ++r) out.at(r, c) = transformed[r];
  }
  return out;
}

Tensor irfft2(const Spectrum& spectrum) {
  const std::size_t height = spectrum.height();
  const std::size_t width = spectrum.width();
  const std::size_t half = spectrum.half_width();
  if (spectrum.size() != height * half) throw std::invalid_argument("irfft2: spectrum layout mismatch");
  const FftPlan row_plan(width);
  const FftPlan col_plan(height);

  std::vector<Complex> partial(height * half);
  std::vector<Complex> column(height);
  for (std::size_t c = 0; c < half; ++c) {
    for (std::size_t r = 0; r < height; ++r) column[r] = spectrum.at(r, c);
    const auto transformed = col_plan.run(column, true);
    for (std::size_t r = 0; r < height; ++r) partial[r * half + c] = transformed[r];
  }

  Tensor out({height, width});
  const double scale = 1.0 / static_cast<double>(height * width);
  std::vector<Complex> row(width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c < half) {
        row[c] = partial[r * half + c];
        if (spectrum.self_conjugate_column(c)) row[c] = row[c].real();
      } else {
        row[c] = std::conj(partial[r * half + (width - c)]);
      }
    }
    const auto transformed = row_plan.run(row, true);
    for (std::size_t c = 0; c < width; ++c) out.at(r, c) = transformed[c].real() * scale;
  }
  return out;
}

Spectrum irfft2_adjoint(const Tensor& cotangent) {
  check_image(cotangent, "irfft2_adjoint");
  Spectrum out = rfft2(cotangent);
  const double scale = 1.0 / static_cast<double>(out.height() * out.width());
  for (std::size_t r = 0; r < out.height(); ++r) {
    for (std::size_t c = 0; c < out.half_width(); ++c) {
      const double weight = out.self_conjugate_column(c) ? scale : 2.0 * scale;
      out.at(r, c) *= weight;
    }
  }
  return out;
}

}  // namespace faithlab
