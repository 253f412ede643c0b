#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace thermoface {

/// Row-major grid of unbounded reals. Intermediate carrier for polar
/// resampling and filter responses.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows(rows), cols(cols), values(rows * cols, fill) {}

  double& at(std::size_t row, std::size_t col) { return values[row * cols + col]; }
  double at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }

  bool empty() const { return values.empty(); }
  bool operator==(const Grid&) const = default;
};

/// Grayscale image with intensities in [0, 1], stored row-major.
///
/// Width is the column count (M), height the row count (N); pixel (x, y)
/// lives at index y * width + x. The constructor enforces the size and range
/// invariants, so every GrayImage in circulation is valid.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t width, std::size_t height, double fill = 0.0);
  GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::span<const double> pixels() const { return pixels_; }

  double at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  // Writes are clamped to [0, 1].
  void set(std::size_t x, std::size_t y, double value);

  Grid to_grid() const;

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> pixels_;
};

/// Reads a grayscale PGM (P2/P5, 8- or 16-bit) or an 8-bit grayscale PNG.
/// Intensities are divided by the format's maximum value.
GrayImage load_image(const std::filesystem::path& path);

/// Writes an 8-bit binary PGM; each byte is round-half-up of value * 255.
void save_image(const GrayImage& img, const std::filesystem::path& path);

/// Encodes a value in [0, 1] the way save_image does.
unsigned char quantize_u8(double value);

/// Nearest-neighbor resize with pixel-center alignment.
GrayImage resize_nearest(const GrayImage& img, std::size_t width, std::size_t height);

}  // namespace thermoface
