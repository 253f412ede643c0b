#include <gtest/gtest.h>

#include <random>

#include "support/test_support.hpp"
#include "thermoface/eigenspace.hpp"
#include "thermoface/error.hpp"

using namespace thermoface;
namespace tt = thermoface::testing;

namespace {

std::vector<FeatureVector> random_samples(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<FeatureVector> out(n);
  for (auto& s : out) {
    s.values.resize(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < s.values.size(); ++j) s.values(j) = dist(gen) * (1.0 + static_cast<double>(j % 4));
  }
  return out;
}

std::vector<std::vector<double>> as_rows(const std::vector<FeatureVector>& samples) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : samples) rows.emplace_back(s.values.data(), s.values.data() + s.values.size());
  return rows;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::ParseError;
}

}  // namespace

TEST(Flatten, RowMajor) {
  const LineImage li(2, {0.1, 0.2, 0.3, 0.4});
  const auto v = flatten(li);
  EXPECT_EQ(v.kind, FeatureKind::Raw);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v.values(2), 0.3);
  GrayImage g(3, 2, std::vector<double>{0, 0.1, 0.2, 0.3, 0.4, 0.5});
  EXPECT_EQ(flatten(g).values(4), 0.4);
}

TEST(FitEigenspace, EigenvaluesMatchDenseJacobi) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto samples = random_samples(9, 14, seed);
    const auto es = fit_eigenspace(samples, 8);
    ASSERT_EQ(es.k(), 8u);
    const auto ref = tt::jacobi_eigenvalues(tt::covariance(as_rows(samples)));
    for (std::size_t i = 0; i < es.k(); ++i) {
      EXPECT_NEAR(es.eigenvalues(static_cast<Eigen::Index>(i)), ref[i], 1e-9 * ref[0]) << "seed " << seed;
    }
    // The covariance has rank n - 1; the remaining reference eigenvalues vanish.
    for (std::size_t i = es.k(); i < ref.size(); ++i) EXPECT_NEAR(ref[i], 0.0, 1e-9 * ref[0]);
  }
}

TEST(FitEigenspace, BasisIsOrthonormalEigenvectorsOfCovariance) {
  const auto samples = random_samples(12, 20, 3);
  const auto es = fit_eigenspace(samples, 6);
  const Eigen::MatrixXd gram = es.basis.transpose() * es.basis;
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);

  const auto cov_rows = tt::covariance(as_rows(samples));
  Eigen::MatrixXd cov(20, 20);
  for (Eigen::Index i = 0; i < 20; ++i) {
    for (Eigen::Index j = 0; j < 20; ++j) cov(i, j) = cov_rows[i][j];
  }
  for (Eigen::Index c = 0; c < 6; ++c) {
    const Eigen::VectorXd u = es.basis.col(c);
    EXPECT_LE((cov * u - es.eigenvalues(c) * u).norm(), 1e-9 * es.eigenvalues(0));
    if (c > 0) {
      EXPECT_GE(es.eigenvalues(c - 1), es.eigenvalues(c));
    }
  }
}

TEST(FitEigenspace, SignConvention) {
  const auto es = fit_eigenspace(random_samples(10, 15, 8), 5);
  for (Eigen::Index c = 0; c < es.basis.cols(); ++c) {
    Eigen::Index idx = 0;
    es.basis.col(c).cwiseAbs().maxCoeff(&idx);
    EXPECT_GT(es.basis(idx, c), 0.0);
  }
}

TEST(FitEigenspace, MeanIsSampleMean) {
  const auto samples = random_samples(5, 6, 1);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(6);
  for (const auto& s : samples) mean += s.values / 5.0;
  EXPECT_LE((fit_eigenspace(samples, 2).mean - mean).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FitEigenspace, FullRankReconstructsTrainingSamples) {
  const auto samples = random_samples(7, 30, 4);
  const auto es = fit_eigenspace(samples, 6);
  for (const auto& s : samples) {
    const auto p = project(es, s);
    EXPECT_EQ(p.kind, FeatureKind::Projected);
    EXPECT_EQ(p.size(), 6u);
    EXPECT_LE((reconstruct(es, p).values - s.values).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(FitEigenspace, MoreDimensionsThanSamplesUsesSmallProblem) {
  const auto samples = random_samples(6, 4096, 5);
  const auto es = fit_eigenspace(samples, 5);
  EXPECT_EQ(es.dim(), 4096u);
  EXPECT_EQ(es.k(), 5u);
}

TEST(FitEigenspace, IdenticalSamplesGiveEmptyBasis) {
  std::vector<FeatureVector> same(4);
  for (auto& s : same) s.values = Eigen::VectorXd::Constant(8, 0.25);
  const auto es = fit_eigenspace(same, 3);
  EXPECT_EQ(es.k(), 0u);
  EXPECT_EQ(es.mean, same[0].values);
}

TEST(FitEigenspace, RankDeficientTruncates) {
  auto samples = random_samples(3, 10, 2);
  samples.push_back(samples[0]);
  samples.push_back(samples[1]);
  const auto es = fit_eigenspace(samples, 4);
  EXPECT_EQ(es.k(), 2u);
}

TEST(FitEigenspace, Errors) {
  EXPECT_EQ(code_of([] { fit_eigenspace(random_samples(1, 5, 0), 1); }), ErrorCode::TooFewSamples);
  EXPECT_EQ(code_of([] { fit_eigenspace(random_samples(5, 6, 0), 5); }), ErrorCode::KTooLarge);
  EXPECT_EQ(code_of([] { fit_eigenspace(random_samples(8, 3, 0), 4); }), ErrorCode::KTooLarge);
  EXPECT_EQ(code_of([] {
              auto s = random_samples(4, 6, 0);
              s[2].values.conservativeResize(5);
              fit_eigenspace(s, 2);
            }),
            ErrorCode::DimensionMismatch);
  const auto es = fit_eigenspace(random_samples(5, 6, 0), 2);
  EXPECT_EQ(code_of([&] { project(es, random_samples(1, 7, 0)[0]); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { reconstruct(es, random_samples(1, 3, 0)[0]); }), ErrorCode::DimensionMismatch);
}

TEST(FitEigenspace, Deterministic) {
  const auto samples = random_samples(10, 50, 6);
  const auto a = fit_eigenspace(samples, 4);
  const auto b = fit_eigenspace(samples, 4);
  EXPECT_EQ(a.basis, b.basis);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
}
