#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "faithlab/tensor.hpp"

namespace faithlab {

// Images stored as [count, rows, cols] with values in [0, 1].
struct Dataset {
  Tensor images;
  std::vector<std::size_t> labels;

  std::size_t count() const { return images.empty() ? 0 : images.shape()[0]; }
  std::size_t rows() const { return images.shape()[1]; }
  std::size_t cols() const { return images.shape()[2]; }
  std::size_t pixels() const { return rows() * cols(); }
  std::span<const double> image(std::size_t i) const;
  // One image as a [rows, cols] tensor.
  Tensor image_tensor(std::size_t i) const;
  // The first `n` samples (or all, when n exceeds the count).
  Dataset head(std::size_t n) const;
};

using IdxContent = std::variant<Tensor, std::vector<std::size_t>>;

// Big-endian IDX: magic 0x00000803 holds unsigned-byte images (scaled by 1/255),
// 0x00000801 holds labels. Gzip-compressed files are read transparently.
IdxContent load_idx(const std::filesystem::path& path);
IdxContent parse_idx(std::span<const std::uint8_t> bytes);

Tensor load_idx_images(const std::filesystem::path& path);
std::vector<std::size_t> load_idx_labels(const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& images, const std::filesystem::path& labels);

// Pixel statistics over every image of a dataset.
struct DatasetStats {
  double mean = 0.0;
  double median = 0.0;
};

DatasetStats compute_stats(const Tensor& images);

// Pixelwise mean image, shape [rows, cols].
Tensor mean_image(const Tensor& images);

}  // namespace faithlab
