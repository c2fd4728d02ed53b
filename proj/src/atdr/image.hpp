#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace atdr {

inline constexpr double kGrayMax = 65535.0;

// Row-major 2-D grid. Gray images use double samples so that gains and
// offsets compose without intermediate quantization; masks use uint8_t.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Image = Grid<double>;
using Mask = Grid<std::uint8_t>;

struct PixelRect {
  int x0 = 0;  // inclusive
  int y0 = 0;
  int x1 = 0;  // exclusive
  int y1 = 0;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
};

std::size_t count_set(const Mask& mask);
std::optional<PixelRect> mask_bounds(const Mask& mask);

template <typename T>
Grid<T> crop(const Grid<T>& grid, const PixelRect& r) {
  Grid<T> out(r.width(), r.height());
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x) out.at(x, y) = grid.at(r.x0 + x, r.y0 + y);
  return out;
}

// Bilinear resampling with pixel-center alignment; samples outside the
// source are clamped to the nearest edge.
Image resample_bilinear(const Image& src, int out_width, int out_height);
Mask threshold(const Image& values, double level);
Image to_image(const Mask& mask);

// Rounds to integer gray levels and clamps to [0, 65535].
Image quantize(const Image& image);

// Reads binary/ASCII PGM (8 or 16 bit) and grayscale PNG (8 or 16 bit).
Image read_image(const std::filesystem::path& path);
// Writes a 16-bit PGM or PNG, chosen by extension. Values are quantized.
void write_image(const std::filesystem::path& path, const Image& image);
// Writes an 8-bit PGM or PNG; values must already lie in [0, 255].
void write_image8(const std::filesystem::path& path, const Image& image);

Mask read_mask(const std::filesystem::path& path);

}  // namespace atdr
