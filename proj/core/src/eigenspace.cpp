#include "thermoface/eigenspace.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "thermoface/error.hpp"

namespace thermoface {

namespace {

FeatureVector from_pixels(std::span<const double> pixels) {
  FeatureVector v;
  v.values = Eigen::Map<const Eigen::VectorXd>(pixels.data(), static_cast<Eigen::Index>(pixels.size()));
  v.kind = FeatureKind::Raw;
  return v;
}

// Relative floor below which a Gram eigenvalue is treated as zero.
constexpr double kRankTolerance = 1e-12;

}  // namespace

FeatureVector flatten(const LineImage& img) { return from_pixels(img.pixels()); }
FeatureVector flatten(const PolarImage& img) { return from_pixels(img.pixels()); }
FeatureVector flatten(const GrayImage& img) { return from_pixels(img.pixels()); }

Eigenspace fit_eigenspace(std::span<const FeatureVector> training, std::size_t k) {
  const std::size_t n = training.size();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "eigenspace needs at least 2 training vectors");
  const auto d = training.front().values.size();
  for (const auto& v : training) {
    if (v.values.size() != d) {
      throw Error(ErrorCode::DimensionMismatch, "training vectors differ in length (" + std::to_string(d) + " vs " +
                                                    std::to_string(v.values.size()) + ")");
    }
  }
  if (k > std::min<std::size_t>(static_cast<std::size_t>(d), n - 1)) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " exceeds min(d, n-1)=" +
                                          std::to_string(std::min<std::size_t>(static_cast<std::size_t>(d), n - 1)));
  }

  Eigenspace es;
  es.mean = Eigen::VectorXd::Zero(d);
  for (const auto& v : training) es.mean += v.values;
  es.mean /= static_cast<double>(n);

  Eigen::MatrixXd centered(d, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) centered.col(static_cast<Eigen::Index>(i)) = training[i].values - es.mean;

  const Eigen::MatrixXd gram = (centered.transpose() * centered) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidParameter, "Gram eigendecomposition did not converge");
  }
  // Ascending from the solver; walk it backwards.
  const Eigen::VectorXd& gvals = solver.eigenvalues();
  const Eigen::MatrixXd& gvecs = solver.eigenvectors();
  const double top = std::max(gvals(static_cast<Eigen::Index>(n) - 1), 0.0);

  std::size_t usable = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double lambda = gvals(static_cast<Eigen::Index>(n - 1 - i));
    if (!(lambda > kRankTolerance * top) || top <= 0.0) break;
    ++usable;
  }
  if (usable < k) {
    spdlog::warn("eigenspace: only {} of {} requested components have non-zero variance; keeping {}", usable, k,
                 usable);
  }

  es.basis.resize(d, static_cast<Eigen::Index>(usable));
  es.eigenvalues.resize(static_cast<Eigen::Index>(usable));
  for (std::size_t i = 0; i < usable; ++i) {
    const auto src = static_cast<Eigen::Index>(n - 1 - i);
    const auto col = static_cast<Eigen::Index>(i);
    es.eigenvalues(col) = std::max(gvals(src), 0.0);
    Eigen::VectorXd u = centered * gvecs.col(src);
    // Re-orthogonalize against the already accepted columns to keep the
    // basis orthonormal when eigenvalues span many orders of magnitude.
    for (Eigen::Index j = 0; j < col; ++j) u -= es.basis.col(j).dot(u) * es.basis.col(j);
    u.normalize();

    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < u.size(); ++r) {
      if (std::abs(u(r)) > best) {
        best = std::abs(u(r));
        arg = r;
      }
    }
    if (u(arg) < 0.0) u = -u;
    es.basis.col(col) = u;
  }
  return es;
}

FeatureVector project(const Eigenspace& es, const FeatureVector& v) {
  if (v.values.size() != es.mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, "project: vector length " + std::to_string(v.values.size()) +
                                                  " does not match eigenspace dimension " +
                                                  std::to_string(es.mean.size()));
  }
  FeatureVector out;
  out.values = es.basis.transpose() * (v.values - es.mean);
  out.kind = FeatureKind::Projected;
  return out;
}

FeatureVector reconstruct(const Eigenspace& es, const FeatureVector& p) {
  if (p.values.size() != es.basis.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "reconstruct: expected " + std::to_string(es.basis.cols()) +
                                                  " coefficients, got " + std::to_string(p.values.size()));
  }
  FeatureVector out;
  out.values = es.mean + es.basis * p.values;
  out.kind = FeatureKind::Raw;
  return out;
}

}  // namespace thermoface
