#pragma once

#include <cstddef>
#include <cstdint>

#include "thermoface/image.hpp"

namespace thermoface {

/// Renders a synthetic thermal face: a warm elliptical head carrying
/// subject-specific Gaussian hot spots and thin line segments (vessel-like
/// ridges). The layout is drawn from subject_seed; the whole pattern is then
/// rotated by rotation_deg (counterclockwise in the polar angle convention,
/// i.e. toward increasing atan2(y - n, x - m)) and scaled by `scale` about the
/// pixel center (size/2, size/2).
///
/// Geometry is expressed relative to size/2, so rendering the same subject at
/// a larger size scales content and frame together. Throws InvalidParameter
/// unless size >= 64 and 0.5 <= scale <= 2.
GrayImage synth_face(std::uint64_t subject_seed, double rotation_deg, double scale, std::size_t size);

/// Adds seeded zero-mean Gaussian noise, clamping to [0, 1].
GrayImage add_sensor_noise(const GrayImage& img, double sigma, std::uint64_t seed);

/// Rigid rotation of an arbitrary image about (floor(W/2), floor(H/2)) with
/// nearest-neighbor lookup; samples falling outside the frame are 0.
GrayImage rotate_nearest(const GrayImage& img, double rotation_deg);

}  // namespace thermoface
