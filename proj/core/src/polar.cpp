#include "thermoface/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "thermoface/error.hpp"

namespace thermoface {

namespace {

bool is_power_of(std::size_t value, unsigned base) {
  if (value == 0) return false;
  while (value % base == 0) value /= base;
  return value == 1;
}

std::size_t nearest_index(double v, std::size_t limit) {
  const double r = std::floor(v + 0.5);
  if (r <= 0.0) return 0;
  return std::min(limit - 1, static_cast<std::size_t>(r));
}

}  // namespace

void PolarConfig::validate() const {
  if (base < 2) throw Error(ErrorCode::InvalidParameter, "polar.base must be >= 2");
  if (!(r_min > 0.0) || !std::isfinite(r_min)) throw Error(ErrorCode::InvalidParameter, "polar.r_min must be positive");
  if (fixed_side && !is_power_of(*fixed_side, base)) {
    throw Error(ErrorCode::InvalidParameter,
                "polar.fixed_side " + std::to_string(*fixed_side) + " is not a power of " + std::to_string(base));
  }
}

PolarImage::PolarImage(std::size_t side, std::vector<double> pixels) : side_(side), pixels_(std::move(pixels)) {
  if (pixels_.size() != side_ * side_) throw Error(ErrorCode::InvalidParameter, "polar image must be square");
  for (double p : pixels_) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidParameter, "polar pixel outside [0,1]");
  }
}

Grid PolarImage::to_grid() const {
  Grid g;
  g.rows = side_;
  g.cols = side_;
  g.values = pixels_;
  return g;
}

CenterRadius center_and_radius(const GrayImage& img) {
  const std::size_t M = img.width();
  const std::size_t N = img.height();
  if (M < 3 || N < 3) {
    throw Error(ErrorCode::ImageTooSmall,
                "log-polar needs at least 3x3, got " + std::to_string(M) + "x" + std::to_string(N));
  }
  CenterRadius cr;
  cr.m = M / 2;
  cr.n = N / 2;
  cr.radius = static_cast<double>(std::min({cr.m, cr.n, M - 1 - cr.m, N - 1 - cr.n}));
  return cr;
}

PolarGrid to_polar(const GrayImage& img, std::size_t angular_samples, std::size_t radial_samples) {
  if (angular_samples < 8 || radial_samples < 8) {
    throw Error(ErrorCode::InvalidParameter, "to_polar needs at least 8 angular and 8 radial samples");
  }
  const auto cr = center_and_radius(img);
  const double m = static_cast<double>(cr.m);
  const double n = static_cast<double>(cr.n);

  std::vector<double> cos_t(angular_samples);
  std::vector<double> sin_t(angular_samples);
  for (std::size_t j = 0; j < angular_samples; ++j) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(angular_samples);
    cos_t[j] = std::cos(theta);
    sin_t[j] = std::sin(theta);
  }

  PolarGrid out{Grid(radial_samples, angular_samples), cr.radius};
  for (std::size_t i = 0; i < radial_samples; ++i) {
    const double r = static_cast<double>(i) * cr.radius / static_cast<double>(radial_samples - 1);
    for (std::size_t j = 0; j < angular_samples; ++j) {
      const auto x = nearest_index(m + r * cos_t[j], img.width());
      const auto y = nearest_index(n + r * sin_t[j], img.height());
      out.grid.at(i, j) = img.at(x, y);
    }
  }
  return out;
}

std::vector<double> log_radial_radii(double radius, double r_min, std::size_t rows) {
  if (!(radius > r_min)) {
    throw Error(ErrorCode::DegenerateRadius,
                "radius " + std::to_string(radius) + " does not exceed r_min " + std::to_string(r_min));
  }
  std::vector<double> radii(rows);
  const double lo = std::log(r_min);
  const double hi = std::log(radius);
  for (std::size_t i = 0; i < rows; ++i) {
    const double p = rows == 1 ? lo : lo + static_cast<double>(i) * (hi - lo) / static_cast<double>(rows - 1);
    radii[i] = std::exp(p);
  }
  radii.front() = r_min;
  if (rows > 1) radii.back() = radius;
  return radii;
}

Grid log_radial(const PolarGrid& polar, const PolarConfig& cfg, std::optional<std::size_t> output_rows) {
  const Grid& in = polar.grid;
  if (in.rows < 2 || in.cols == 0) throw Error(ErrorCode::InvalidParameter, "log_radial needs a polar grid");
  const std::size_t rows = output_rows.value_or(in.rows);
  if (rows == 0) throw Error(ErrorCode::InvalidParameter, "log_radial needs at least one output row");

  const double R = polar.radius;
  const auto radii = log_radial_radii(R, cfg.r_min, rows);
  const double step = R / static_cast<double>(in.rows - 1);
  const auto clamped_log = [&](std::size_t k) {
    return std::log(std::max(static_cast<double>(k) * step, cfg.r_min));
  };

  Grid out(rows, in.cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const double target = std::log(radii[i]);
    // Neighbours in the linear radius table; all rows at or below r_min share
    // one clamped log value, and ties go to the lowest index (the center).
    std::size_t hi = static_cast<std::size_t>(std::ceil(radii[i] / step));
    hi = std::clamp<std::size_t>(hi, 1, in.rows - 1);
    std::size_t lo = hi - 1;
    if (static_cast<double>(lo) * step <= cfg.r_min) lo = 0;
    const double d_lo = std::abs(clamped_log(lo) - target);
    const double d_hi = std::abs(clamped_log(hi) - target);
    const std::size_t src = d_lo <= d_hi ? lo : hi;
    std::copy_n(in.values.begin() + static_cast<std::ptrdiff_t>(src * in.cols), in.cols,
                out.values.begin() + static_cast<std::ptrdiff_t>(i * in.cols));
  }
  return out;
}

std::size_t polar_side(const PolarConfig& cfg, double radius) {
  if (cfg.fixed_side) return *cfg.fixed_side;
  std::size_t side = 1;
  while (static_cast<double>(side) < radius) side *= cfg.base;
  return side;
}

PolarImage resize_square(const Grid& grid, const PolarConfig& cfg, double radius) {
  if (grid.empty()) throw Error(ErrorCode::InvalidParameter, "resize_square: empty grid");
  const std::size_t side = polar_side(cfg, radius);
  std::vector<double> pixels(side * side);
  for (std::size_t r = 0; r < side; ++r) {
    const std::size_t sr = r * grid.rows / side;
    for (std::size_t c = 0; c < side; ++c) {
      const std::size_t sc = c * grid.cols / side;
      pixels[r * side + c] = grid.at(sr, sc);
    }
  }
  return PolarImage(side, std::move(pixels));
}

PolarImage log_polar_transform(const GrayImage& img, const PolarConfig& cfg) {
  cfg.validate();
  const auto cr = center_and_radius(img);
  if (!(cr.radius > cfg.r_min)) {
    throw Error(ErrorCode::DegenerateRadius, "image radius " + std::to_string(cr.radius) + " is not above r_min");
  }
  const std::size_t side = polar_side(cfg, cr.radius);
  const std::size_t samples = 4 * std::max<std::size_t>(side, 2);
  const auto polar = to_polar(img, samples, samples);
  const auto logr = log_radial(polar, cfg);
  return resize_square(logr, cfg, cr.radius);
}

}  // namespace thermoface
