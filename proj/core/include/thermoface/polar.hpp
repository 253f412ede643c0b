#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "thermoface/image.hpp"

namespace thermoface {

struct PolarConfig {
  unsigned base = 2;                              // Z
  std::optional<std::size_t> fixed_side = 128;    // overrides Z^q when set
  double r_min = 1.0;                             // radial clamp before the log

  // Throws InvalidParameter.
  void validate() const;
  bool operator==(const PolarConfig&) const = default;
};

/// Square log-polar image. Rows index log-radius (row 0 = smallest), columns
/// index angle (column 0 = 0 degrees, increasing counterclockwise). The column
/// axis is circular.
class PolarImage {
 public:
  PolarImage() = default;
  PolarImage(std::size_t side, std::vector<double> pixels);

  std::size_t side() const { return side_; }
  std::span<const double> pixels() const { return pixels_; }
  double at(std::size_t row, std::size_t col) const { return pixels_[row * side_ + col % side_]; }

  Grid to_grid() const;
  GrayImage to_gray() const { return GrayImage(side_, side_, pixels_); }

  bool operator==(const PolarImage&) const = default;

 private:
  std::size_t side_ = 0;
  std::vector<double> pixels_;
};

struct CenterRadius {
  std::size_t m = 0;  // column of the center
  std::size_t n = 0;  // row of the center
  double radius = 0;

  bool operator==(const CenterRadius&) const = default;
};

/// Intermediate polar sampling: rows are radii, columns angles.
struct PolarGrid {
  Grid grid;
  double radius = 0;  // R of the source image
};

/// m = floor(M/2), n = floor(N/2), R = largest circle about (m, n) inside the
/// frame. Throws ImageTooSmall below 3x3.
CenterRadius center_and_radius(const GrayImage& img);

/// Inverse-mapped polar sampling: row i is radius i*R/(radial_samples-1),
/// column j is angle j*360/angular_samples; each sample takes the nearest
/// Cartesian pixel.
PolarGrid to_polar(const GrayImage& img, std::size_t angular_samples, std::size_t radial_samples);

/// Radii sampled by log_radial: evenly spaced in ln r over [ln r_min, ln R].
std::vector<double> log_radial_radii(double radius, double r_min, std::size_t rows);

/// Resamples the radial axis of a polar grid onto evenly spaced log-radius.
/// Radii below r_min count as r_min, so the center (row 0 of the input) is
/// what lands in output row 0. output_rows defaults to the input row count.
/// Throws DegenerateRadius when R <= r_min.
Grid log_radial(const PolarGrid& polar, const PolarConfig& cfg, std::optional<std::size_t> output_rows = {});

/// Output side: cfg.fixed_side, or Z^ceil(log_Z R) when unset.
std::size_t polar_side(const PolarConfig& cfg, double radius);

/// Nearest-neighbor resize of a grid to a square of polar_side(cfg, radius).
/// Output index k samples input index floor(k * in / out) on both axes, so
/// column 0 stays at 0 degrees.
PolarImage resize_square(const Grid& grid, const PolarConfig& cfg, double radius);

/// Full Cartesian to log-polar transform (angular and radial oversampling of 4x).
PolarImage log_polar_transform(const GrayImage& img, const PolarConfig& cfg);

}  // namespace thermoface
