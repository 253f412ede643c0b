#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "thermoface/config.hpp"
#include "thermoface/eigenspace.hpp"
#include "thermoface/image.hpp"
#include "thermoface/manifest.hpp"
#include "thermoface/mlp.hpp"

namespace thermoface {

using FeatureFn = std::function<FeatureVector(const GrayImage&)>;

/// Image -> raw feature vector for one transform variant:
///   raw                  nearest resize to side x side
///   line_skeletal        resize, then line extraction (replicated edges)
///   polar                log-polar transform
///   polar_line_skeletal  log-polar, then line extraction (circular angle axis)
/// side is polar.fixed_side (128 when unset) so all variants share a length.
FeatureFn make_pipeline(TransformVariant variant, const PipelineConfig& cfg);

/// Image as the variant sees it before flattening (used by `transform`).
GrayImage apply_transform(TransformVariant variant, const PipelineConfig& cfg, const GrayImage& img);

/// 7:7:6 split of `total`, remainder to the first folds.
std::array<std::size_t, 3> default_fold_sizes(std::size_t total);

/// Assigns folds stratified by subject with exact fold sizes. Every subject
/// first gets one image in each fold; the remaining images are dealt so each
/// subject spreads across folds in proportion to the fold sizes. Manifests
/// that already carry folds are returned unchanged.
/// Throws SizesMismatch, StratificationImpossible.
DatasetManifest assign_folds(const DatasetManifest& manifest, std::array<std::size_t, 3> sizes, std::uint64_t seed);

/// Eigenspace + network trained together; only valid as a pair.
struct TrainedPipeline {
  Eigenspace eigenspace;
  MlpModel network;
  std::vector<double> loss_history;
  double pca_seconds = 0;
  double training_seconds = 0;
};

/// Fits PCA on the training features, then trains the MLP on the projections.
/// The network's input and output sizes follow the eigenspace k and
/// num_classes. Throws EmptyClassInTraining when a class has no sample.
TrainedPipeline train_pipeline(std::span<const FeatureVector> features, std::span<const std::size_t> labels,
                               std::size_t num_classes, const PipelineConfig& cfg, std::uint64_t seed);

Prediction classify(const TrainedPipeline& model, const FeatureVector& raw);

struct FoldResult {
  int arrangement = 0;  // 1..3
  int test_part = 0;    // held-out fold index
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double top1 = 0, top2 = 0, top3 = 0;
  std::size_t epochs = 0;
  double final_loss = 0;
  std::uint64_t model_digest = 0;  // FNV-1a of the serialized fold model
};

struct StageTiming {
  double preprocess_s = 0, pca_s = 0, training_s = 0, testing_s = 0;
};

struct EvaluationReport {
  TransformVariant variant = TransformVariant::PolarLineSkeletal;
  std::vector<FoldResult> folds;
  double top1 = 0, top2 = 0, top3 = 0;  // sample-weighted over folds
  std::size_t n_test = 0;
  std::size_t num_classes = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted], top-1
  StageTiming timing;
};

/// The three arrangements in order: test on part 2, then 1, then 0.
inline constexpr std::array<int, 3> kTestPartOrder = {2, 1, 0};

/// 3-fold cross-validation on preloaded images (manifest must carry folds).
EvaluationReport run_cross_validation(std::span<const GrayImage> images, const DatasetManifest& manifest,
                                      TransformVariant variant, const PipelineConfig& cfg);

/// Loads images relative to the manifest file, then cross-validates.
EvaluationReport run_cross_validation(const DatasetManifest& manifest, const std::filesystem::path& manifest_path,
                                      TransformVariant variant, const PipelineConfig& cfg);

/// One cross-validation per variant with identical folds and seeds.
std::vector<EvaluationReport> compare_transforms(std::span<const GrayImage> images, const DatasetManifest& manifest,
                                                 const PipelineConfig& cfg);

std::vector<GrayImage> load_manifest_images(const DatasetManifest& manifest, const std::filesystem::path& manifest_path);

/// `variant,fold,top1,top2,top3,n_test`; fold is 1..3 or `all`.
std::string report_csv(std::span<const EvaluationReport> reports);
/// Square matrix with a `true\predicted` header row.
std::string confusion_csv(const EvaluationReport& report);
/// Top-choice table plus per-fold lines and timings.
std::string summary_text(const EvaluationReport& report);

}  // namespace thermoface
