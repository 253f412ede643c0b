#pragma once

// Test-only helpers and independent oracles. Nothing here calls into the
// library code path it is used to check.

#include <Eigen/Dense>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermoface/image.hpp"
#include "thermoface/linefeat.hpp"
#include "thermoface/mlp.hpp"

namespace thermoface::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("thermoface_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline GrayImage random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> px(w * h);
  for (auto& p : px) p = dist(gen);
  return GrayImage(w, h, std::move(px));
}

inline Grid random_grid(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Grid g(rows, cols);
  for (auto& v : g.values) v = dist(gen);
  return g;
}

// Quarter turn counterclockwise of a square grid: out(i, j) = in(j, n-1-i).
inline Grid rotate_grid90(const Grid& g) {
  Grid out(g.cols, g.rows);
  const std::size_t n = g.rows;
  for (std::size_t i = 0; i < g.cols; ++i) {
    for (std::size_t j = 0; j < g.rows; ++j) out.at(i, j) = g.at(j, n - 1 - i);
  }
  return out;
}

// Triple-loop correlation with explicit modular column indexing and clamped
// rows, summed in mask row-major order.
inline Grid naive_convolve(const Grid& img, const Mask3& mask, bool wrap_columns) {
  Grid out(img.rows, img.cols);
  const long rows = static_cast<long>(img.rows);
  const long cols = static_cast<long>(img.cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (long a = -1; a <= 1; ++a) {
        for (long b = -1; b <= 1; ++b) {
          const long rr = std::clamp(r + a, 0L, rows - 1);
          const long cc = wrap_columns ? ((c + b) % cols + cols) % cols : std::clamp(c + b, 0L, cols - 1);
          acc += mask.coefficients[static_cast<std::size_t>((a + 1) * 3 + (b + 1))] *
                 img.values[static_cast<std::size_t>(rr * cols + cc)];
        }
      }
      out.values[static_cast<std::size_t>(r * cols + c)] = acc;
    }
  }
  return out;
}

// Cyclic Jacobi eigenvalue iteration for a symmetric matrix; returns the
// eigenvalues sorted in non-increasing order.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

// Dense d x d covariance (1/n convention) of row-sample data.
inline std::vector<std::vector<double>> covariance(const std::vector<std::vector<double>>& samples) {
  const std::size_t n = samples.size();
  const std::size_t d = samples.front().size();
  std::vector<double> mean(d, 0.0);
  for (const auto& s : samples) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += s[j] / static_cast<double>(n);
  }
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) cov[i][j] += (s[i] - mean[i]) * (s[j] - mean[j]) / static_cast<double>(n);
    }
  }
  return cov;
}

// Loss of one sample computed with a plain loop forward pass.
inline double reference_loss(const MlpModel& m, const Eigen::VectorXd& x, const Eigen::VectorXd& target) {
  std::vector<double> a(x.data(), x.data() + x.size());
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    std::vector<double> next(static_cast<std::size_t>(m.weights[l].rows()));
    for (Eigen::Index r = 0; r < m.weights[l].rows(); ++r) {
      double z = m.biases[l](r);
      for (Eigen::Index c = 0; c < m.weights[l].cols(); ++c) z += m.weights[l](r, c) * a[static_cast<std::size_t>(c)];
      next[static_cast<std::size_t>(r)] = std::tanh(z);
    }
    a = std::move(next);
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] - target(static_cast<Eigen::Index>(i));
    loss += 0.5 * e * e;
  }
  return loss;
}

struct GradientCheck {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
};

// Central finite differences against compute_gradients. The relative error
// denominator is floored at 1e-7 so vanishing gradients are compared in
// absolute terms.
inline GradientCheck check_gradients(const MlpModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& target,
                                     double eps = 1e-5) {
  const Gradients g = compute_gradients(model, x, target);
  GradientCheck out;
  MlpModel probe = model;
  const auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-7});
  };
  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < probe.weights[l].size(); ++i) {
      double& w = probe.weights[l].data()[i];
      const double keep = w;
      w = keep + eps;
      const double up = reference_loss(probe, x, target);
      w = keep - eps;
      const double down = reference_loss(probe, x, target);
      w = keep;
      out.max_rel_error = std::max(out.max_rel_error, rel((up - down) / (2 * eps), g.weights[l].data()[i]));
      ++out.parameters;
    }
    for (Eigen::Index i = 0; i < probe.biases[l].size(); ++i) {
      double& b = probe.biases[l](i);
      const double keep = b;
      b = keep + eps;
      const double up = reference_loss(probe, x, target);
      b = keep - eps;
      const double down = reference_loss(probe, x, target);
      b = keep;
      out.max_rel_error = std::max(out.max_rel_error, rel((up - down) / (2 * eps), g.biases[l](i)));
      ++out.parameters;
    }
  }
  return out;
}

struct ShiftMatch {
  long shift = 0;
  double correlation = -2.0;
};

// Zero-mean normalized cross-correlation between a and b with b's columns
// rolled left by k: compares a(r, c) with b(r, (c + k) mod side).
inline double ncc_shifted(std::span<const double> a, std::span<const double> b, std::size_t side, long k) {
  const std::size_t n = side * side;
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0, saa = 0, sbb = 0;
  const long s = static_cast<long>(side);
  for (std::size_t r = 0; r < side; ++r) {
    for (long c = 0; c < s; ++c) {
      const std::size_t cb = static_cast<std::size_t>(((c + k) % s + s) % s);
      const double x = a[r * side + static_cast<std::size_t>(c)] - ma;
      const double y = b[r * side + cb] - mb;
      sab += x * y;
      saa += x * x;
      sbb += y * y;
    }
  }
  if (saa <= 0 || sbb <= 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

inline ShiftMatch best_column_shift(std::span<const double> a, std::span<const double> b, std::size_t side) {
  ShiftMatch best;
  const long s = static_cast<long>(side);
  for (long k = -s / 2; k < s / 2; ++k) {
    const double c = ncc_shifted(a, b, side, k);
    if (c > best.correlation) best = {k, c};
  }
  return best;
}

inline long circular_distance(long a, long b, long side) {
  const long d = ((a - b) % side + side) % side;
  return std::min(d, side - d);
}

}  // namespace thermoface::testing
