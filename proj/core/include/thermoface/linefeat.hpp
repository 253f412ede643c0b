#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermoface/image.hpp"
#include "thermoface/polar.hpp"

namespace thermoface {

enum class LineOrientation { Horizontal, Vertical, DiagPlus45, DiagMinus45 };
enum class LinePosition { TopOrLeft, Center, BottomOrRight };

/// 3x3 correlation kernel, row-major. Coefficients sum to zero.
struct Mask3 {
  std::array<double, 9> coefficients{};
  LineOrientation orientation = LineOrientation::Horizontal;
  LinePosition position = LinePosition::Center;

  double at(std::size_t row, std::size_t col) const { return coefficients[row * 3 + col]; }
  double sum() const;
  // Quarter turn counterclockwise: out(i, j) = in(j, 2 - i).
  std::array<double, 9> rotated90() const;

  bool operator==(const Mask3&) const = default;
};

/// Exactly twelve zero-sum masks.
class MaskBank {
 public:
  static constexpr std::size_t kSize = 12;

  // Throws WrongCount or NonZeroSumMask.
  explicit MaskBank(std::vector<Mask3> masks);

  std::span<const Mask3> masks() const { return masks_; }
  const Mask3& operator[](std::size_t i) const { return masks_[i]; }
  std::size_t size() const { return masks_.size(); }

  bool operator==(const MaskBank&) const = default;

 private:
  std::vector<Mask3> masks_;
};

/// Four orientations times three line positions, +2 on the line cells and
/// -1 elsewhere. Order: horizontal (top, center, bottom), vertical (left,
/// center, right), +45 degrees, -45 degrees. The off-center diagonal lines
/// wrap around the window so that each still covers three cells.
MaskBank default_mask_bank();

/// Text format: 12 blocks of 3 lines x 3 reals, blank-line separated,
/// `#` comments allowed. Masks take the default bank's labels by index.
MaskBank parse_mask_bank(std::string_view text);
MaskBank load_mask_bank(const std::filesystem::path& path);
std::string serialize_mask_bank(const MaskBank& bank);

enum class ColumnEdge { Circular, Replicate };

/// Correlation (no kernel flip), accumulated as sum c * (x - center) so a
/// constant neighbourhood gives exactly 0. Rows use edge replication; columns
/// wrap or replicate according to `columns`. Throws ImageTooSmall below 3x3.
Grid convolve3(const Grid& img, const Mask3& mask, ColumnEdge columns);

/// Polar overload: columns are the circular angle axis.
Grid convolve3(const PolarImage& img, const Mask3& mask);

/// Pointwise max of |response| over the bank, before normalization.
Grid line_response(const Grid& img, const MaskBank& bank, ColumnEdge columns);

/// Square map of combined line responses, normalized to [0, 1].
class LineImage {
 public:
  LineImage() = default;
  LineImage(std::size_t side, std::vector<double> pixels);

  std::size_t side() const { return side_; }
  std::span<const double> pixels() const { return pixels_; }
  double at(std::size_t row, std::size_t col) const { return pixels_[row * side_ + col]; }
  GrayImage to_gray() const { return GrayImage(side_, side_, pixels_); }

  bool operator==(const LineImage&) const = default;

 private:
  std::size_t side_ = 0;
  std::vector<double> pixels_;
};

struct LineFeatureConfig {
  std::optional<std::filesystem::path> bank_path;  // built-in bank when unset
  std::optional<double> binarize_at;               // threshold on the normalized map

  MaskBank load_bank() const;
  bool operator==(const LineFeatureConfig&) const = default;
};

/// Max-abs line response divided by its own maximum (an all-zero map stays
/// zero). With binarize_at, values >= the threshold become 1 and the rest 0.
LineImage extract_line_image(const PolarImage& img, const MaskBank& bank,
                             std::optional<double> binarize_at = std::nullopt);

/// Same combination applied to a square Cartesian image, replicating edges
/// on both axes.
LineImage extract_line_image_cartesian(const GrayImage& img, const MaskBank& bank,
                                       std::optional<double> binarize_at = std::nullopt);

}  // namespace thermoface
