#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "thermoface/linefeat.hpp"
#include "thermoface/polar.hpp"

namespace thermoface {

enum class FeatureKind { Raw, Projected };

struct FeatureVector {
  Eigen::VectorXd values;
  FeatureKind kind = FeatureKind::Raw;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  bool operator==(const FeatureVector& other) const {
    return kind == other.kind && values.size() == other.values.size() && values == other.values;
  }
};

/// Row-major flattening into a raw feature vector.
FeatureVector flatten(const LineImage& img);
FeatureVector flatten(const PolarImage& img);
FeatureVector flatten(const GrayImage& img);

/// PCA basis of a training set.
///
/// `basis` is d x k with orthonormal columns ordered by non-increasing
/// eigenvalue. Eigenvalues use the 1/n covariance convention. Each column is
/// signed so its largest-magnitude entry (lowest index on ties) is positive.
struct Eigenspace {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;
  Eigen::VectorXd eigenvalues;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t k() const { return static_cast<std::size_t>(basis.cols()); }
};

/// Fits an eigenspace with the snapshot method: the n x n Gram matrix of the
/// centered samples is decomposed and its eigenvectors mapped back to d-space.
///
/// Throws TooFewSamples (n < 2), DimensionMismatch, KTooLarge
/// (k > min(d, n - 1)). Components whose eigenvalue is numerically zero are
/// dropped with a warning, so the returned k() may be smaller than requested;
/// identical training vectors give k() == 0.
Eigenspace fit_eigenspace(std::span<const FeatureVector> training, std::size_t k);

/// basis^T (v - mean). Throws DimensionMismatch.
FeatureVector project(const Eigenspace& es, const FeatureVector& v);

/// mean + basis * p. Throws DimensionMismatch.
FeatureVector reconstruct(const Eigenspace& es, const FeatureVector& p);

}  // namespace thermoface
