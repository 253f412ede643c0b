#include "thermoface/evaluation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>

#include "thermoface/error.hpp"
#include "thermoface/linefeat.hpp"
#include "thermoface/model_file.hpp"
#include "thermoface/polar.hpp"
#include "thermoface/random.hpp"

namespace thermoface {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t feature_side(const PipelineConfig& cfg) { return cfg.polar.fixed_side.value_or(128); }

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> default_labels(std::size_t num_classes) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < num_classes; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "subject_%02zu", i);
    labels.emplace_back(buf);
  }
  return labels;
}

}  // namespace

GrayImage apply_transform(TransformVariant variant, const PipelineConfig& cfg, const GrayImage& img) {
  const std::size_t side = feature_side(cfg);
  switch (variant) {
    case TransformVariant::Raw:
      return resize_nearest(img, side, side);
    case TransformVariant::LineSkeletal:
      return extract_line_image_cartesian(resize_nearest(img, side, side), cfg.linefeat.load_bank(),
                                          cfg.linefeat.binarize_at)
          .to_gray();
    case TransformVariant::Polar:
      return log_polar_transform(img, cfg.polar).to_gray();
    case TransformVariant::PolarLineSkeletal:
      return extract_line_image(log_polar_transform(img, cfg.polar), cfg.linefeat.load_bank(),
                                cfg.linefeat.binarize_at)
          .to_gray();
  }
  throw Error(ErrorCode::InvalidParameter, "unknown transform variant");
}

FeatureFn make_pipeline(TransformVariant variant, const PipelineConfig& cfg) {
  cfg.validate();
  const std::size_t side = feature_side(cfg);
  const PolarConfig polar = cfg.polar;
  const std::optional<double> binarize = cfg.linefeat.binarize_at;
  switch (variant) {
    case TransformVariant::Raw:
      return [side](const GrayImage& img) { return flatten(resize_nearest(img, side, side)); };
    case TransformVariant::LineSkeletal:
      return [side, bank = cfg.linefeat.load_bank(), binarize](const GrayImage& img) {
        return flatten(extract_line_image_cartesian(resize_nearest(img, side, side), bank, binarize));
      };
    case TransformVariant::Polar:
      return [polar](const GrayImage& img) { return flatten(log_polar_transform(img, polar)); };
    case TransformVariant::PolarLineSkeletal:
      return [polar, bank = cfg.linefeat.load_bank(), binarize](const GrayImage& img) {
        return flatten(extract_line_image(log_polar_transform(img, polar), bank, binarize));
      };
  }
  throw Error(ErrorCode::InvalidParameter, "unknown transform variant");
}

std::array<std::size_t, 3> default_fold_sizes(std::size_t total) {
  std::array<std::size_t, 3> sizes = {total * 7 / 20, total * 7 / 20, total * 6 / 20};
  std::size_t rem = total - (sizes[0] + sizes[1] + sizes[2]);
  for (std::size_t f = 0; rem > 0; f = (f + 1) % 3, --rem) ++sizes[f];
  return sizes;
}

DatasetManifest assign_folds(const DatasetManifest& manifest, std::array<std::size_t, 3> sizes, std::uint64_t seed) {
  if (manifest.has_folds()) return manifest;
  const std::size_t total = manifest.entries.size();
  if (sizes[0] + sizes[1] + sizes[2] != total) {
    throw Error(ErrorCode::SizesMismatch, "fold sizes " + std::to_string(sizes[0]) + "+" + std::to_string(sizes[1]) +
                                              "+" + std::to_string(sizes[2]) + " != " + std::to_string(total) +
                                              " entries");
  }

  std::map<std::size_t, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < total; ++i) by_subject[manifest.entries[i].subject].push_back(i);
  for (const auto& [subject, idx] : by_subject) {
    if (idx.size() < 3) {
      throw Error(ErrorCode::StratificationImpossible,
                  "subject " + std::to_string(subject) + " has " + std::to_string(idx.size()) + " images; need >= 3");
    }
  }
  const std::size_t subjects = by_subject.size();
  for (std::size_t f = 0; f < 3; ++f) {
    if (sizes[f] < subjects) {
      throw Error(ErrorCode::StratificationImpossible, "fold " + std::to_string(f) + " size " +
                                                           std::to_string(sizes[f]) + " is smaller than the " +
                                                           std::to_string(subjects) + " subjects");
    }
  }

  DatasetManifest out = manifest;
  std::vector<std::size_t> rest;
  for (auto& [subject, idx] : by_subject) {
    Rng rng(mix_seed(seed, subject));
    rng.shuffle(std::span(idx));
    for (int f = 0; f < 3; ++f) out.entries[idx[static_cast<std::size_t>(f)]].fold = f;
    rest.insert(rest.end(), idx.begin() + 3, idx.end());
  }

  // Deal the remainder subject by subject against an evenly interleaved fold
  // pattern with exact counts, so each subject's share tracks the fold sizes.
  const std::array<std::size_t, 3> quota = {sizes[0] - subjects, sizes[1] - subjects, sizes[2] - subjects};
  std::array<std::size_t, 3> used = {0, 0, 0};
  const double n_rest = static_cast<double>(rest.size());
  for (std::size_t t = 0; t < rest.size(); ++t) {
    int pick = -1;
    double best = 0.0;
    for (int f = 0; f < 3; ++f) {
      const auto uf = static_cast<std::size_t>(f);
      if (used[uf] >= quota[uf]) continue;
      const double deficit =
          static_cast<double>(quota[uf]) * static_cast<double>(t + 1) / n_rest - static_cast<double>(used[uf]);
      if (pick < 0 || deficit > best) {
        pick = f;
        best = deficit;
      }
    }
    ++used[static_cast<std::size_t>(pick)];
    out.entries[rest[t]].fold = pick;
  }
  return out;
}

TrainedPipeline train_pipeline(std::span<const FeatureVector> features, std::span<const std::size_t> labels,
                               std::size_t num_classes, const PipelineConfig& cfg, std::uint64_t seed) {
  if (features.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature and label counts differ");
  }
  std::vector<std::size_t> per_class(num_classes, 0);
  for (auto l : labels) {
    if (l >= num_classes) throw Error(ErrorCode::InvalidLabel, "label " + std::to_string(l) + " out of range");
    ++per_class[l];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (per_class[c] == 0) {
      throw Error(ErrorCode::EmptyClassInTraining, "class " + std::to_string(c) + " has no training images");
    }
  }
  if (features.size() < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 training images");

  const std::size_t d = features.front().size();
  std::size_t k = std::min({cfg.pca_k, features.size() - 1, d});
  if (k < cfg.pca_k) {
    spdlog::warn("pca.k={} clamped to {} for {} training images", cfg.pca_k, k, features.size());
  }

  TrainedPipeline out;
  auto start = Clock::now();
  out.eigenspace = fit_eigenspace(features, k);
  out.pca_seconds = seconds_since(start);
  if (out.eigenspace.k() == 0) {
    throw Error(ErrorCode::TooFewSamples, "training images carry no variance; eigenspace is empty");
  }

  std::vector<TrainingSample> samples;
  samples.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    samples.push_back({project(out.eigenspace, features[i]), labels[i], std::nullopt});
  }

  MlpConfig mc = cfg.mlp;
  if (mc.layer_sizes.front() != out.eigenspace.k() || mc.layer_sizes.back() != num_classes) {
    spdlog::info("network resized from {}..{} to {}..{} (eigenspace k, class count)", mc.layer_sizes.front(),
                 mc.layer_sizes.back(), out.eigenspace.k(), num_classes);
  }
  mc.layer_sizes.front() = out.eigenspace.k();
  mc.layer_sizes.back() = num_classes;
  mc.seed = seed;
  start = Clock::now();
  out.network = init_model(mc);
  out.loss_history = train(out.network, samples);
  out.training_seconds = seconds_since(start);
  return out;
}

Prediction classify(const TrainedPipeline& model, const FeatureVector& raw) {
  return forward(model.network, project(model.eigenspace, raw));
}

std::vector<GrayImage> load_manifest_images(const DatasetManifest& manifest, const std::filesystem::path& manifest_path) {
  std::vector<GrayImage> images;
  images.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) images.push_back(load_image(resolve_entry_path(manifest_path, e)));
  return images;
}

EvaluationReport run_cross_validation(std::span<const GrayImage> images, const DatasetManifest& manifest_in,
                                      TransformVariant variant, const PipelineConfig& cfg) {
  if (images.size() != manifest_in.entries.size()) {
    throw Error(ErrorCode::DimensionMismatch, "image count does not match manifest");
  }
  const DatasetManifest manifest =
      assign_folds(manifest_in, cfg.eval.fold_sizes.value_or(default_fold_sizes(manifest_in.entries.size())),
                   cfg.seed);
  const std::size_t classes = manifest.num_subjects;

  EvaluationReport report;
  report.variant = variant;
  report.num_classes = classes;
  report.confusion.assign(classes, std::vector<std::size_t>(classes, 0));

  auto start = Clock::now();
  const FeatureFn pipeline = make_pipeline(variant, cfg);
  std::vector<FeatureVector> features;
  features.reserve(images.size());
  for (const auto& img : images) features.push_back(pipeline(img));
  report.timing.preprocess_s = seconds_since(start);

  std::size_t hits1 = 0, hits2 = 0, hits3 = 0;
  const auto labels = default_labels(classes);
  for (int a = 0; a < 3; ++a) {
    const int test_part = kTestPartOrder[static_cast<std::size_t>(a)];
    std::vector<FeatureVector> train_x;
    std::vector<std::size_t> train_y;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
      if (*manifest.entries[i].fold == test_part) {
        test_idx.push_back(i);
      } else {
        train_x.push_back(features[i]);
        train_y.push_back(manifest.entries[i].subject);
      }
    }

    const TrainedPipeline model = train_pipeline(train_x, train_y, classes, cfg, mix_seed(cfg.seed, a + 1));
    report.timing.pca_s += model.pca_seconds;
    report.timing.training_s += model.training_seconds;

    FoldResult fold;
    fold.arrangement = a + 1;
    fold.test_part = test_part;
    fold.n_train = train_x.size();
    fold.n_test = test_idx.size();
    fold.epochs = model.loss_history.size();
    fold.final_loss = model.loss_history.empty() ? 0.0 : model.loss_history.back();
    fold.model_digest = fnv1a64(serialize_model(ModelFile{cfg, model, labels}));

    start = Clock::now();
    std::size_t f1 = 0, f2 = 0, f3 = 0;
    for (std::size_t i : test_idx) {
      const auto truth = manifest.entries[i].subject;
      const auto ranking = classify(model, features[i]).ranking;
      const auto pos = static_cast<std::size_t>(std::find(ranking.begin(), ranking.end(), truth) - ranking.begin());
      f1 += pos < 1;
      f2 += pos < 2;
      f3 += pos < 3;
      ++report.confusion[truth][ranking.front()];
    }
    report.timing.testing_s += seconds_since(start);

    const double n = static_cast<double>(std::max<std::size_t>(fold.n_test, 1));
    fold.top1 = static_cast<double>(f1) / n;
    fold.top2 = static_cast<double>(f2) / n;
    fold.top3 = static_cast<double>(f3) / n;
    hits1 += f1;
    hits2 += f2;
    hits3 += f3;
    report.n_test += fold.n_test;
    report.folds.push_back(fold);
  }
  const double n = static_cast<double>(std::max<std::size_t>(report.n_test, 1));
  report.top1 = static_cast<double>(hits1) / n;
  report.top2 = static_cast<double>(hits2) / n;
  report.top3 = static_cast<double>(hits3) / n;
  return report;
}

EvaluationReport run_cross_validation(const DatasetManifest& manifest, const std::filesystem::path& manifest_path,
                                      TransformVariant variant, const PipelineConfig& cfg) {
  const auto images = load_manifest_images(manifest, manifest_path);
  return run_cross_validation(images, manifest, variant, cfg);
}

std::vector<EvaluationReport> compare_transforms(std::span<const GrayImage> images, const DatasetManifest& manifest,
                                                 const PipelineConfig& cfg) {
  // Pin the folds once so every variant sees the same split.
  const DatasetManifest folded =
      assign_folds(manifest, cfg.eval.fold_sizes.value_or(default_fold_sizes(manifest.entries.size())), cfg.seed);
  std::vector<EvaluationReport> reports;
  for (auto v : kAllVariants) reports.push_back(run_cross_validation(images, folded, v, cfg));
  return reports;
}

std::string report_csv(std::span<const EvaluationReport> reports) {
  std::string out = "variant,fold,top1,top2,top3,n_test\n";
  for (const auto& r : reports) {
    const std::string v(to_string(r.variant));
    for (const auto& f : r.folds) {
      out += v + "," + std::to_string(f.arrangement) + "," + fixed(f.top1) + "," + fixed(f.top2) + "," +
             fixed(f.top3) + "," + std::to_string(f.n_test) + "\n";
    }
    out += v + ",all," + fixed(r.top1) + "," + fixed(r.top2) + "," + fixed(r.top3) + "," +
           std::to_string(r.n_test) + "\n";
  }
  return out;
}

std::string confusion_csv(const EvaluationReport& report) {
  std::string out = "true\\predicted";
  for (std::size_t c = 0; c < report.num_classes; ++c) out += "," + std::to_string(c);
  out += "\n";
  for (std::size_t t = 0; t < report.num_classes; ++t) {
    out += std::to_string(t);
    for (std::size_t c = 0; c < report.num_classes; ++c) out += "," + std::to_string(report.confusion[t][c]);
    out += "\n";
  }
  return out;
}

std::string summary_text(const EvaluationReport& r) {
  std::string out;
  out += "Transform variant: " + std::string(to_string(r.variant)) + "\n";
  out += "Test images: " + std::to_string(r.n_test) + " over 3-fold cross validation\n\n";
  out += "Sl. No.  Top Choice       Accuracy obtained\n";
  out += "1        Top 1 choice     " + fixed(100.0 * r.top1, 2) + "%\n";
  out += "2        Top 2 choices    " + fixed(100.0 * r.top2, 2) + "%\n";
  out += "3        Top 3 choices    " + fixed(100.0 * r.top3, 2) + "%\n\n";
  for (const auto& f : r.folds) {
    out += "fold " + std::to_string(f.arrangement) + " (test part " + std::to_string(f.test_part) +
           "): train=" + std::to_string(f.n_train) + " test=" + std::to_string(f.n_test) + " top1=" +
           fixed(f.top1, 4) + " top2=" + fixed(f.top2, 4) + " top3=" + fixed(f.top3, 4) +
           " epochs=" + std::to_string(f.epochs) + " loss=" + fixed(f.final_loss, 6) + "\n";
  }
  out += "timing (s): preprocess=" + fixed(r.timing.preprocess_s, 3) + " pca=" + fixed(r.timing.pca_s, 3) +
         " training=" + fixed(r.timing.training_s, 3) + " testing=" + fixed(r.timing.testing_s, 3) + "\n";
  return out;
}

}  // namespace thermoface
