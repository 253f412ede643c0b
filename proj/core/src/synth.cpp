#include "thermoface/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "thermoface/error.hpp"
#include "thermoface/random.hpp"

namespace thermoface {

namespace {

struct Blob {
  double cx, cy, sigma, amplitude;
};

struct Segment {
  double x0, y0, x1, y1, sigma, amplitude;
};

struct FaceLayout {
  double head_a, head_b, head_level;
  std::vector<Blob> blobs;
  std::vector<Segment> segments;
};

constexpr std::size_t kBlobs = 6;
constexpr std::size_t kSegments = 8;

FaceLayout make_layout(std::uint64_t subject_seed) {
  Rng rng(mix_seed(subject_seed, 0x7468'6572'6d6full));
  FaceLayout face;
  face.head_a = rng.uniform(0.52, 0.64);
  face.head_b = rng.uniform(0.66, 0.78);
  face.head_level = rng.uniform(0.25, 0.4);

  for (std::size_t i = 0; i < kBlobs; ++i) {
    const double r = 0.5 * std::sqrt(rng.uniform());
    const double a = 2.0 * std::numbers::pi * rng.uniform();
    face.blobs.push_back({r * std::cos(a), r * std::sin(a), rng.uniform(0.05, 0.13), rng.uniform(0.15, 0.4)});
  }
  for (std::size_t i = 0; i < kSegments; ++i) {
    const double r = 0.45 * std::sqrt(rng.uniform());
    const double a = 2.0 * std::numbers::pi * rng.uniform();
    const double cx = r * std::cos(a);
    const double cy = r * std::sin(a);
    const double dir = std::numbers::pi * rng.uniform();
    const double half = 0.5 * rng.uniform(0.2, 0.55);
    face.segments.push_back({cx - half * std::cos(dir), cy - half * std::sin(dir), cx + half * std::cos(dir),
                             cy + half * std::sin(dir), rng.uniform(0.012, 0.02), rng.uniform(0.25, 0.45)});
  }
  return face;
}

double segment_distance_sq(const Segment& s, double x, double y) {
  const double dx = s.x1 - s.x0;
  const double dy = s.y1 - s.y0;
  const double len_sq = dx * dx + dy * dy;
  double t = len_sq > 0.0 ? ((x - s.x0) * dx + (y - s.y0) * dy) / len_sq : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double px = s.x0 + t * dx - x;
  const double py = s.y0 + t * dy - y;
  return px * px + py * py;
}

double smoothstep(double edge0, double edge1, double v) {
  const double t = std::clamp((v - edge0) / (edge1 - edge0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Intensity of the canonical (unrotated, unscaled) face at normalized (x, y).
double evaluate(const FaceLayout& face, double x, double y) {
  const double e = std::sqrt((x / face.head_a) * (x / face.head_a) + (y / face.head_b) * (y / face.head_b));
  const double head = 1.0 - smoothstep(0.92, 1.05, e);
  if (head <= 0.0) return 0.0;
  double v = face.head_level;
  for (const auto& b : face.blobs) {
    const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
    v += b.amplitude * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
  }
  for (const auto& s : face.segments) {
    v += s.amplitude * std::exp(-segment_distance_sq(s, x, y) / (2.0 * s.sigma * s.sigma));
  }
  return std::clamp(head * v, 0.0, 1.0);
}

}  // namespace

GrayImage synth_face(std::uint64_t subject_seed, double rotation_deg, double scale, std::size_t size) {
  if (size < 64) throw Error(ErrorCode::InvalidParameter, "synth_face: size must be >= 64");
  if (!(scale >= 0.5 && scale <= 2.0)) throw Error(ErrorCode::InvalidParameter, "synth_face: scale must be in [0.5, 2]");
  if (!std::isfinite(rotation_deg)) throw Error(ErrorCode::InvalidParameter, "synth_face: rotation must be finite");

  const FaceLayout face = make_layout(subject_seed);
  const double turn = std::fmod(rotation_deg, 360.0) * std::numbers::pi / 180.0;
  const double c = std::cos(turn);
  const double s = std::sin(turn);
  const double center = static_cast<double>(size / 2);
  const double unit = static_cast<double>(size) / 2.0;

  std::vector<double> pixels(size * size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double u = (static_cast<double>(x) - center) / unit;
      const double v = (static_cast<double>(y) - center) / unit;
      // Inverse map: undo rotation, then undo scaling.
      const double qx = (c * u + s * v) / scale;
      const double qy = (-s * u + c * v) / scale;
      pixels[y * size + x] = evaluate(face, qx, qy);
    }
  }
  return GrayImage(size, size, std::move(pixels));
}

GrayImage add_sensor_noise(const GrayImage& img, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> pixels(img.pixels().begin(), img.pixels().end());
  for (double& p : pixels) p = std::clamp(p + sigma * rng.normal(), 0.0, 1.0);
  return GrayImage(img.width(), img.height(), std::move(pixels));
}

GrayImage rotate_nearest(const GrayImage& img, double rotation_deg) {
  const double turn = std::fmod(rotation_deg, 360.0) * std::numbers::pi / 180.0;
  const double c = std::cos(turn);
  const double s = std::sin(turn);
  const double m = static_cast<double>(img.width() / 2);
  const double n = static_cast<double>(img.height() / 2);
  GrayImage out(img.width(), img.height(), 0.0);
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      const double u = static_cast<double>(x) - m;
      const double v = static_cast<double>(y) - n;
      const double sx = std::floor(m + c * u + s * v + 0.5);
      const double sy = std::floor(n - s * u + c * v + 0.5);
      if (sx >= 0 && sy >= 0 && sx < static_cast<double>(img.width()) && sy < static_cast<double>(img.height())) {
        out.set(x, y, img.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy)));
      }
    }
  }
  return out;
}

}  // namespace thermoface
