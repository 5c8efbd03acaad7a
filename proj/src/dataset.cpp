#include "faithlab/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace faithlab {

std::span<const double> Dataset::image(std::size_t i) const {
  const std::size_t n = pixels();
  return images.values().subspan(i * n, n);
}

Tensor Dataset::image_tensor(std::size_t i) const {
  const auto px = image(i);
  return Tensor({rows(), cols()}, std::vector<double>(px.begin(), px.end()));
}

Dataset Dataset::head(std::size_t n) const {
  n = std::min(n, count());
  const auto px = images.values().subspan(0, n * pixels());
  Dataset out;
  out.images = Tensor({n, rows(), cols()}, std::vector<double>(px.begin(), px.end()));
  out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(std::min(n, labels.size())));
  return out;
}

namespace {

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v = (v << 8) | bytes_[offset_++];
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* field) {
    need(n, field);
    auto out = bytes_.subspan(offset_, n);
    offset_ += n;
    return out;
  }

 private:
  void need(std::size_t n, const char* field) const {
    if (bytes_.size() - offset_ < n) {
      throw std::runtime_error("idx: truncated " + std::string(field) + " at byte offset " + std::to_string(offset_) +
                               " (need " + std::to_string(n) + " bytes, " + std::to_string(bytes_.size() - offset_) +
                               " available)");
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  gzFile file = gzopen(path.string().c_str(), "rb");
  if (file == nullptr) throw std::runtime_error("idx: cannot open " + path.string());
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> chunk(1 << 16);
  for (;;) {
    const int n = gzread(file, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      gzclose(file);
      throw std::runtime_error("idx: read error in " + path.string());
    }
    if (n == 0) break;
    out.insert(out.end(), chunk.begin(), chunk.begin() + n);
  }
  gzclose(file);
  return out;
}

}  // namespace

IdxContent parse_idx(std::span<const std::uint8_t> bytes) {
  ByteReader reader(bytes);
  const std::uint32_t magic = reader.u32("magic");
  if (magic == 0x00000801) {
    const std::uint32_t count = reader.u32("label count");
    const auto payload = reader.take(count, "label payload");
    return std::vector<std::size_t>(payload.begin(), payload.end());
  }
  if (magic == 0x00000803) {
    const std::uint32_t count = reader.u32("image count");
    const std::uint32_t rows = reader.u32("row count");
    const std::uint32_t cols = reader.u32("column count");
    if (count == 0 || rows == 0 || cols == 0) throw std::runtime_error("idx: image file with an empty dimension");
    const std::size_t total = std::size_t{count} * rows * cols;
    const auto payload = reader.take(total, "image payload");
    std::vector<double> data(total);
    for (std::size_t i = 0; i < total; ++i) data[i] = static_cast<double>(payload[i]) / 255.0;
    return Tensor({count, rows, cols}, std::move(data));
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08X", magic);
  throw std::runtime_error(std::string("idx: unsupported magic ") + buf +
                           " at byte offset 0 (expected 0x00000801 labels or 0x00000803 images)");
}

IdxContent load_idx(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_idx(bytes);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

Tensor load_idx_images(const std::filesystem::path& path) {
  auto content = load_idx(path);
  if (auto* images = std::get_if<Tensor>(&content)) return std::move(*images);
  throw std::runtime_error(path.string() + ": expected an image file, found labels");
}

std::vector<std::size_t> load_idx_labels(const std::filesystem::path& path) {
  auto content = load_idx(path);
  if (auto* labels = std::get_if<std::vector<std::size_t>>(&content)) return std::move(*labels);
  throw std::runtime_error(path.string() + ": expected a label file, found images");
}

Dataset load_dataset(const std::filesystem::path& images, const std::filesystem::path& labels) {
  Dataset out{load_idx_images(images), load_idx_labels(labels)};
  if (out.labels.size() != out.count()) {
    throw std::runtime_error("dataset: " + std::to_string(out.count()) + " images but " +
                             std::to_string(out.labels.size()) + " labels");
  }
  return out;
}

DatasetStats compute_stats(const Tensor& images) {
  if (images.empty()) throw std::invalid_argument("compute_stats: empty image set");
  DatasetStats stats;
  double total = 0.0;
  for (double v : images.values()) total += v;
  stats.mean = total / static_cast<double>(images.size());
  std::vector<double> sorted = images.data();
  const std::size_t mid = sorted.size() / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
  const double upper = sorted[mid];
  if (sorted.size() % 2 == 1) {
    stats.median = upper;
  } else {
    const double lower = *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid));
    stats.median = 0.5 * (lower + upper);
  }
  return stats;
}

Tensor mean_image(const Tensor& images) {
  if (images.rank() != 3) throw std::invalid_argument("mean_image: expected [count, rows, cols]");
  const std::size_t count = images.shape()[0];
  const std::size_t pixels = images.shape()[1] * images.shape()[2];
  Tensor out({images.shape()[1], images.shape()[2]});
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t p = 0; p < pixels; ++p) out[p] += images[n * pixels + p];
  }
  for (auto& v : out.data()) v /= static_cast<double>(count);
  return out;
}

}  // namespace faithlab
