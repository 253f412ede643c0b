#include "thermoface/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "thermoface/atomic_file.hpp"
#include "thermoface/error.hpp"

namespace thermoface {

namespace fs = std::filesystem;

GrayImage::GrayImage(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), pixels_(width * height, std::clamp(fill, 0.0, 1.0)) {}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != width_ * height_) {
    throw Error(ErrorCode::InvalidParameter, "pixel count " + std::to_string(pixels_.size()) +
                                                 " does not match " + std::to_string(width_) + "x" +
                                                 std::to_string(height_));
  }
  for (double p : pixels_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::InvalidParameter, "pixel value outside [0,1]: " + std::to_string(p));
    }
  }
}

void GrayImage::set(std::size_t x, std::size_t y, double value) {
  pixels_[y * width_ + x] = std::clamp(value, 0.0, 1.0);
}

Grid GrayImage::to_grid() const {
  Grid g;
  g.rows = height_;
  g.cols = width_;
  g.values = pixels_;
  return g;
}

namespace {

std::vector<unsigned char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::UnreadableFile, "read error on " + path.string());
  return bytes;
}

// Cursor over a PNM header: whitespace and '#' comments separate tokens.
class PnmCursor {
 public:
  PnmCursor(std::span<const unsigned char> bytes, const fs::path& path) : bytes_(bytes), path_(path) {}

  unsigned long next_uint() {
    skip_separators();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) corrupt("expected an unsigned integer");
    unsigned long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFul) corrupt("header value too large");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from raster data.
  void skip_single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) corrupt("missing separator before raster");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

  [[noreturn]] void corrupt(const std::string& what) const {
    throw Error(ErrorCode::UnreadableFile, path_.string() + ": " + what);
  }

 private:
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const unsigned char> bytes_;
  const fs::path& path_;
  std::size_t pos_ = 2;
};

GrayImage decode_pgm(std::span<const unsigned char> bytes, const fs::path& path, bool ascii) {
  PnmCursor cur(bytes, path);
  const auto width = cur.next_uint();
  const auto height = cur.next_uint();
  const auto maxval = cur.next_uint();
  if (width == 0 || height == 0) cur.corrupt("zero image dimension");
  if (maxval == 0 || maxval > 65535) cur.corrupt("maxval must be in 1..65535");

  const std::size_t count = width * height;
  const double scale = 1.0 / static_cast<double>(maxval);
  std::vector<double> pixels(count);
  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = cur.next_uint();
      if (v > maxval) cur.corrupt("sample exceeds maxval");
      pixels[i] = static_cast<double>(v) * scale;
    }
  } else {
    cur.skip_single_whitespace();
    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t start = cur.pos();
    if (bytes.size() - start < count * bytes_per_sample) cur.corrupt("truncated raster");
    for (std::size_t i = 0; i < count; ++i) {
      unsigned long v = bytes[start + i * bytes_per_sample];
      if (bytes_per_sample == 2) v = (v << 8) | bytes[start + i * 2 + 1];
      if (v > maxval) cur.corrupt("sample exceeds maxval");
      pixels[i] = static_cast<double>(v) * scale;
    }
  }
  return GrayImage(width, height, std::move(pixels));
}

GrayImage decode_png(std::span<const unsigned char> bytes, const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::UnreadableFile, path.string() + ": " + image.message);
  }
  const auto fmt = image.format;
  if (fmt & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA | PNG_FORMAT_FLAG_COLORMAP)) {
    png_image_free(&image);
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": only grayscale PNG is supported");
  }
  if (fmt & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": only 8-bit PNG is supported");
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> raster(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raster.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::UnreadableFile, path.string() + ": " + msg);
  }
  std::vector<double> pixels(raster.size());
  std::transform(raster.begin(), raster.end(), pixels.begin(),
                 [](unsigned char v) { return static_cast<double>(v) / 255.0; });
  return GrayImage(image.width, image.height, std::move(pixels));
}

}  // namespace

GrayImage load_image(const fs::path& path) {
  const auto bytes = read_all(path);
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes, path);
  if (bytes.size() < 2) throw Error(ErrorCode::UnreadableFile, path.string() + ": file too short");
  if (bytes[0] == 'P') {
    switch (bytes[1]) {
      case '2': return decode_pgm(bytes, path, true);
      case '5': return decode_pgm(bytes, path, false);
      case '3':
      case '6':
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": color PPM images are not supported");
      default: break;
    }
  }
  throw Error(ErrorCode::UnsupportedFormat, path.string() + ": unknown magic number");
}

unsigned char quantize_u8(double value) {
  return static_cast<unsigned char>(std::floor(std::clamp(value, 0.0, 1.0) * 255.0 + 0.5));
}

void save_image(const GrayImage& img, const fs::path& path) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  bytes.reserve(header.size() + img.pixels().size());
  for (double p : img.pixels()) bytes.push_back(quantize_u8(p));
  write_file_atomic(path, bytes);
}

GrayImage resize_nearest(const GrayImage& img, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0 || img.width() == 0 || img.height() == 0) {
    throw Error(ErrorCode::InvalidParameter, "resize_nearest: empty geometry");
  }
  std::vector<double> out(width * height);
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t sy = std::min(img.height() - 1, (2 * y + 1) * img.height() / (2 * height));
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t sx = std::min(img.width() - 1, (2 * x + 1) * img.width() / (2 * width));
      out[y * width + x] = img.at(sx, sy);
    }
  }
  return GrayImage(width, height, std::move(out));
}

}  // namespace thermoface
