#include "thermoface/linefeat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "thermoface/error.hpp"

namespace thermoface {

namespace fs = std::filesystem;

double Mask3::sum() const {
  double s = 0.0;
  for (double c : coefficients) s += c;
  return s;
}

std::array<double, 9> Mask3::rotated90() const {
  std::array<double, 9> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) out[i * 3 + j] = at(j, 2 - i);
  }
  return out;
}

MaskBank::MaskBank(std::vector<Mask3> masks) : masks_(std::move(masks)) {
  if (masks_.size() != kSize) {
    throw Error(ErrorCode::WrongCount, "mask bank needs 12 masks, got " + std::to_string(masks_.size()));
  }
  for (std::size_t i = 0; i < masks_.size(); ++i) {
    double scale = 0.0;
    for (double c : masks_[i].coefficients) scale += std::abs(c);
    const double s = masks_[i].sum();
    if (std::abs(s) > 1e-12 * std::max(scale, 1.0)) {
      throw Error(ErrorCode::NonZeroSumMask, "mask " + std::to_string(i) + " sums to " + std::to_string(s));
    }
  }
}

namespace {

template <typename OnLine>
Mask3 line_mask(LineOrientation orientation, LinePosition position, OnLine on_line) {
  Mask3 m;
  m.orientation = orientation;
  m.position = position;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m.coefficients[static_cast<std::size_t>(i * 3 + j)] = on_line(i, j) ? 2.0 : -1.0;
  }
  return m;
}

constexpr std::array<LinePosition, 3> kPositions = {LinePosition::TopOrLeft, LinePosition::Center,
                                                    LinePosition::BottomOrRight};

}  // namespace

MaskBank default_mask_bank() {
  std::vector<Mask3> masks;
  for (int p = 0; p < 3; ++p) {
    masks.push_back(line_mask(LineOrientation::Horizontal, kPositions[p], [p](int i, int) { return i == p; }));
  }
  for (int p = 0; p < 3; ++p) {
    masks.push_back(line_mask(LineOrientation::Vertical, kPositions[p], [p](int, int j) { return j == p; }));
  }
  // Anti-diagonal classes (i + j) mod 3; class 2 is the one through the center.
  constexpr std::array<int, 3> plus45 = {1, 2, 0};
  for (int p = 0; p < 3; ++p) {
    const int cls = plus45[p];
    masks.push_back(
        line_mask(LineOrientation::DiagPlus45, kPositions[p], [cls](int i, int j) { return (i + j) % 3 == cls; }));
  }
  // Diagonal classes (j - i) mod 3; class 0 is the main diagonal.
  constexpr std::array<int, 3> minus45 = {1, 0, 2};
  for (int p = 0; p < 3; ++p) {
    const int cls = minus45[p];
    masks.push_back(line_mask(LineOrientation::DiagMinus45, kPositions[p],
                              [cls](int i, int j) { return (j - i + 3) % 3 == cls; }));
  }
  return MaskBank(std::move(masks));
}

MaskBank parse_mask_bank(std::string_view text) {
  const MaskBank defaults = default_mask_bank();
  std::vector<std::vector<double>> blocks;
  std::vector<double> current;
  std::size_t rows_in_block = 0;
  std::size_t line_no = 0;

  const auto close_block = [&] {
    if (rows_in_block == 0) return;
    if (rows_in_block != 3) {
      throw Error(ErrorCode::ParseError, "mask block ending at line " + std::to_string(line_no) + " has " +
                                             std::to_string(rows_in_block) + " rows, expected 3");
    }
    blocks.push_back(std::move(current));
    current.clear();
    rows_in_block = 0;
  };

  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      close_block();
      continue;
    }
    std::istringstream fields(line);
    std::string token;
    std::size_t count = 0;
    while (fields >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" + token + "'");
      }
      current.push_back(v);
      ++count;
    }
    if (count != 3) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 3 values");
    }
    ++rows_in_block;
  }
  close_block();

  if (blocks.size() != MaskBank::kSize) {
    throw Error(ErrorCode::WrongCount, "mask file has " + std::to_string(blocks.size()) + " blocks, expected 12");
  }
  std::vector<Mask3> masks;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Mask3 m = defaults[b];
    std::copy(blocks[b].begin(), blocks[b].end(), m.coefficients.begin());
    masks.push_back(m);
  }
  return MaskBank(std::move(masks));
}

MaskBank load_mask_bank(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open mask bank " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_mask_bank(buffer.str());
}

std::string serialize_mask_bank(const MaskBank& bank) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t b = 0; b < bank.size(); ++b) {
    if (b) out << '\n';
    for (std::size_t i = 0; i < 3; ++i) {
      out << bank[b].at(i, 0) << ' ' << bank[b].at(i, 1) << ' ' << bank[b].at(i, 2) << '\n';
    }
  }
  return out.str();
}

Grid convolve3(const Grid& img, const Mask3& mask, ColumnEdge columns) {
  if (img.rows < 3 || img.cols < 3) throw Error(ErrorCode::ImageTooSmall, "convolve3 needs at least 3x3");
  const std::size_t rows = img.rows;
  const std::size_t cols = img.cols;
  Grid out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::array<std::size_t, 3> rr = {r == 0 ? 0 : r - 1, r, std::min(r + 1, rows - 1)};
    for (std::size_t c = 0; c < cols; ++c) {
      std::array<std::size_t, 3> cc{};
      if (columns == ColumnEdge::Circular) {
        cc = {(c + cols - 1) % cols, c, (c + 1) % cols};
      } else {
        cc = {c == 0 ? 0 : c - 1, c, std::min(c + 1, cols - 1)};
      }
      // Differences against the center pixel: the coefficients sum to zero,
      // so this equals the plain correlation and is exactly 0 on flat input.
      const double center = img.at(r, c);
      double acc = 0.0;
      for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) acc += mask.coefficients[a * 3 + b] * (img.at(rr[a], cc[b]) - center);
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

Grid convolve3(const PolarImage& img, const Mask3& mask) {
  return convolve3(img.to_grid(), mask, ColumnEdge::Circular);
}

Grid line_response(const Grid& img, const MaskBank& bank, ColumnEdge columns) {
  Grid combined(img.rows, img.cols, 0.0);
  for (const auto& mask : bank.masks()) {
    const Grid r = convolve3(img, mask, columns);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      combined.values[i] = std::max(combined.values[i], std::abs(r.values[i]));
    }
  }
  return combined;
}

LineImage::LineImage(std::size_t side, std::vector<double> pixels) : side_(side), pixels_(std::move(pixels)) {
  if (pixels_.size() != side_ * side_) throw Error(ErrorCode::InvalidParameter, "line image must be square");
  for (double p : pixels_) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidParameter, "line pixel outside [0,1]");
  }
}

namespace {

LineImage normalize(Grid response, std::optional<double> binarize_at) {
  const double peak = response.values.empty() ? 0.0 : *std::max_element(response.values.begin(), response.values.end());
  if (peak > 0.0) {
    for (double& v : response.values) v = std::min(v / peak, 1.0);
  }
  if (binarize_at) {
    for (double& v : response.values) v = v >= *binarize_at ? 1.0 : 0.0;
  }
  return LineImage(response.rows, std::move(response.values));
}

}  // namespace

MaskBank LineFeatureConfig::load_bank() const {
  return bank_path ? load_mask_bank(*bank_path) : default_mask_bank();
}

LineImage extract_line_image(const PolarImage& img, const MaskBank& bank, std::optional<double> binarize_at) {
  return normalize(line_response(img.to_grid(), bank, ColumnEdge::Circular), binarize_at);
}

LineImage extract_line_image_cartesian(const GrayImage& img, const MaskBank& bank, std::optional<double> binarize_at) {
  if (img.width() != img.height()) throw Error(ErrorCode::InvalidParameter, "line extraction needs a square image");
  return normalize(line_response(img.to_grid(), bank, ColumnEdge::Replicate), binarize_at);
}

}  // namespace thermoface
