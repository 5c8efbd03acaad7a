#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "faithlab/tensor.hpp"

namespace faithlab {

using Complex = std::complex<double>;

// Half-plane spectrum of a real H x W image: H rows by W/2+1 columns of complex
// coefficients, row-major. Columns beyond W/2 are implied by Hermitian symmetry,
// so the inverse transform of any Spectrum is real.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(std::size_t height, std::size_t width);
  Spectrum(std::size_t height, std::size_t width, std::vector<Complex> coefficients);

  static Spectrum from_polar(std::size_t height, std::size_t width, std::span<const double> magnitude,
                             std::span<const double> phase);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t half_width() const { return width_ / 2 + 1; }
  std::size_t size() const { return coefficients_.size(); }

  Complex& operator[](std::size_t i) { return coefficients_[i]; }
  const Complex& operator[](std::size_t i) const { return coefficients_[i]; }
  Complex& at(std::size_t row, std::size_t col) { return coefficients_[row * half_width() + col]; }
  const Complex& at(std::size_t row, std::size_t col) const { return coefficients_[row * half_width() + col]; }

  const std::vector<Complex>& coefficients() const { return coefficients_; }
  std::vector<Complex>& coefficients() { return coefficients_; }

  double magnitude(std::size_t i) const { return std::abs(coefficients_[i]); }
  double phase(std::size_t i) const { return std::arg(coefficients_[i]); }
  std::vector<double> magnitudes() const;
  std::vector<double> phases() const;

  // True when column `col` of the half plane is its own mirror (col 0, and col W/2 for even W).
  bool self_conjugate_column(std::size_t col) const;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<Complex> coefficients_;
};

// Role of each half-plane coefficient for a real image. Columns 0 and W/2 (even
// W) mirror onto themselves: their DC/Nyquist rows are real, and rows past H/2
// are conjugates of rows below it. Every other coefficient is free.
enum class BinRole { kFree, kReal, kMirror };

std::vector<BinRole> half_plane_roles(std::size_t height, std::size_t width);
// Index of the coefficient a kMirror bin is the conjugate of.
std::size_t mirror_source(std::size_t index, std::size_t height, std::size_t width);

// Hermitian spectrum with the given magnitudes: free bins take the given phase,
// real bins take phase 0, mirror bins the conjugate of their source.
Spectrum hermitian_from_polar(std::size_t height, std::size_t width, std::span<const double> magnitude,
                              std::span<const double> phase);

// Unnormalized forward / 1/N-scaled inverse complex DFT of arbitrary length.
std::vector<Complex> fft(std::span<const Complex> input);
std::vector<Complex> ifft(std::span<const Complex> input);

// Forward transform is unnormalized; irfft2 scales by 1/(H*W).
Spectrum rfft2(const Tensor& image);
Tensor irfft2(const Spectrum& spectrum);

// Gradient of <cotangent, irfft2(X)> with respect to the half-plane coefficients,
// returned as d/dRe + i*d/dIm per coefficient.
Spectrum irfft2_adjoint(const Tensor& cotangent);

}  // namespace faithlab
