#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "support/test_support.hpp"
#include "thermoface/error.hpp"
#include "thermoface/evaluation.hpp"
#include "thermoface/model_file.hpp"
#include "thermoface/random.hpp"
#include "thermoface/synth.hpp"

using namespace thermoface;

namespace {

DatasetManifest plain_manifest(std::size_t subjects, std::size_t per_subject) {
  DatasetManifest m;
  for (std::size_t s = 0; s < subjects; ++s) {
    for (std::size_t i = 0; i < per_subject; ++i) {
      m.entries.push_back({"s" + std::to_string(s) + "_" + std::to_string(i) + ".pgm", s, std::nullopt});
    }
  }
  m.num_subjects = subjects;
  return m;
}

// Small rotated corpus: subjects x per_subject images at 0/+-15/+-45 degrees.
struct Corpus {
  DatasetManifest manifest;
  std::vector<GrayImage> images;
};

Corpus small_corpus(std::size_t subjects, std::size_t per_subject, std::size_t size = 64) {
  const double rotations[] = {0, 15, -15, 45, -45};
  Corpus c;
  c.manifest = plain_manifest(subjects, per_subject);
  for (const auto& e : c.manifest.entries) {
    const std::size_t i = c.images.size() % per_subject;
    const auto seed = mix_seed(11, e.subject);
    c.images.push_back(add_sensor_noise(synth_face(seed, rotations[i % 5], 1.0, size), 0.02, mix_seed(seed, i)));
  }
  return c;
}

PipelineConfig fast_config() {
  PipelineConfig cfg;
  cfg.seed = 3;
  cfg.polar.fixed_side = 32;
  cfg.pca_k = 12;
  cfg.mlp.layer_sizes = {12, 16, 4};
  return cfg;
}

std::map<std::pair<int, std::size_t>, std::size_t> fold_subject_counts(const DatasetManifest& m) {
  std::map<std::pair<int, std::size_t>, std::size_t> counts;
  for (const auto& e : m.entries) ++counts[{*e.fold, e.subject}];
  return counts;
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

TEST(FoldSizes, SevenSevenSix) {
  EXPECT_EQ(default_fold_sizes(2000), (std::array<std::size_t, 3>{700, 700, 600}));
  EXPECT_EQ(default_fold_sizes(20), (std::array<std::size_t, 3>{7, 7, 6}));
  for (std::size_t n : {3u, 40u, 41u, 199u, 200u}) {
    const auto s = default_fold_sizes(n);
    EXPECT_EQ(s[0] + s[1] + s[2], n);
  }
}

TEST(AssignFolds, SevenHundredSplitCountsExactly) {
  const auto m = plain_manifest(16, 125);
  const auto out = assign_folds(m, {700, 700, 600}, 1);
  std::array<std::size_t, 3> counts{};
  for (const auto& e : out.entries) ++counts[static_cast<std::size_t>(*e.fold)];
  EXPECT_EQ(counts, (std::array<std::size_t, 3>{700, 700, 600}));
  const auto per = fold_subject_counts(out);
  for (int f = 0; f < 3; ++f) {
    for (std::size_t s = 0; s < 16; ++s) {
      const std::size_t n = per.at({f, s});
      // Proportional spread: 125 * 7/20 = 43.75 and 125 * 6/20 = 37.5.
      EXPECT_LE(std::abs(static_cast<double>(n) - 125.0 * (f == 2 ? 0.3 : 0.35)), 1.5) << f << " " << s;
    }
  }
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    EXPECT_EQ(out.entries[i].path, m.entries[i].path);
    EXPECT_EQ(out.entries[i].subject, m.entries[i].subject);
  }
}

TEST(AssignFolds, EverySubjectInEveryFold) {
  const auto out = assign_folds(plain_manifest(3, 10), {10, 10, 10}, 0);
  const auto per = fold_subject_counts(out);
  EXPECT_EQ(per.size(), 9u);
  for (const auto& [key, n] : per) EXPECT_GE(n, 1u);
}

TEST(AssignFolds, UnevenSubjects) {
  auto m = plain_manifest(4, 5);
  for (int i = 0; i < 6; ++i) m.entries.push_back({"extra" + std::to_string(i), 2, std::nullopt});
  const auto sizes = default_fold_sizes(m.entries.size());
  const auto out = assign_folds(m, sizes, 9);
  std::array<std::size_t, 3> counts{};
  for (const auto& e : out.entries) ++counts[static_cast<std::size_t>(*e.fold)];
  EXPECT_EQ(counts, sizes);
  EXPECT_EQ(fold_subject_counts(out).size(), 12u);
}

TEST(AssignFolds, DeterministicAndSeeded) {
  const auto m = plain_manifest(5, 12);
  const auto a = assign_folds(m, {20, 20, 20}, 4);
  EXPECT_EQ(serialize_manifest(a), serialize_manifest(assign_folds(m, {20, 20, 20}, 4)));
  EXPECT_NE(serialize_manifest(a), serialize_manifest(assign_folds(m, {20, 20, 20}, 5)));
}

TEST(AssignFolds, ExplicitFoldsWin) {
  auto m = plain_manifest(2, 3);
  for (std::size_t i = 0; i < m.entries.size(); ++i) m.entries[i].fold = static_cast<int>(i % 3);
  EXPECT_EQ(serialize_manifest(assign_folds(m, {1, 1, 4}, 0)), serialize_manifest(m));
}

TEST(AssignFolds, Errors) {
  EXPECT_EQ(code_of([] { assign_folds(plain_manifest(3, 10), {10, 10, 11}, 0); }), ErrorCode::SizesMismatch);
  EXPECT_EQ(code_of([] { assign_folds(plain_manifest(3, 2), {2, 2, 2}, 0); }), ErrorCode::StratificationImpossible);
  EXPECT_EQ(code_of([] { assign_folds(plain_manifest(4, 6), {20, 2, 2}, 0); }), ErrorCode::StratificationImpossible);
}

TEST(Pipeline, AllVariantsShareLength) {
  const auto cfg = fast_config();
  const auto img = synth_face(1, 0, 1, 80);
  for (auto v : kAllVariants) EXPECT_EQ(make_pipeline(v, cfg)(img).size(), 32u * 32u) << to_string(v);
}

TEST(Pipeline, PolarVariantIsFlattenedTransform) {
  const auto cfg = fast_config();
  const auto img = synth_face(2, 10, 1, 64);
  EXPECT_EQ(make_pipeline(TransformVariant::Polar, cfg)(img), flatten(log_polar_transform(img, cfg.polar)));
}

TEST(Pipeline, PolarLineOnConstantIsZero) {
  const auto v = make_pipeline(TransformVariant::PolarLineSkeletal, fast_config())(GrayImage(70, 60, 0.37));
  EXPECT_EQ(v.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Pipeline, ApplyTransformMatchesFeatures) {
  const auto cfg = fast_config();
  const auto img = synth_face(4, 0, 1, 64);
  for (auto v : kAllVariants) EXPECT_EQ(flatten(apply_transform(v, cfg, img)), make_pipeline(v, cfg)(img));
}

TEST(TrainPipeline, EmptyClass) {
  const auto c = small_corpus(3, 5);
  std::vector<FeatureVector> feats;
  std::vector<std::size_t> labels;
  const auto fn = make_pipeline(TransformVariant::Polar, fast_config());
  for (std::size_t i = 0; i < c.images.size(); ++i) {
    if (c.manifest.entries[i].subject == 1) continue;
    feats.push_back(fn(c.images[i]));
    labels.push_back(c.manifest.entries[i].subject);
  }
  EXPECT_EQ(code_of([&] { train_pipeline(feats, labels, 3, fast_config(), 0); }), ErrorCode::EmptyClassInTraining);
}

TEST(TrainPipeline, NetworkShapeFollowsData) {
  const auto c = small_corpus(3, 5);
  std::vector<FeatureVector> feats;
  std::vector<std::size_t> labels;
  const auto fn = make_pipeline(TransformVariant::Polar, fast_config());
  for (std::size_t i = 0; i < c.images.size(); ++i) {
    feats.push_back(fn(c.images[i]));
    labels.push_back(c.manifest.entries[i].subject);
  }
  const auto model = train_pipeline(feats, labels, 3, fast_config(), 0);
  EXPECT_EQ(model.eigenspace.k(), 12u);
  EXPECT_EQ(model.network.num_inputs(), 12u);
  EXPECT_EQ(model.network.num_classes(), 3u);
  EXPECT_EQ(model.network.config.layer_sizes[1], 16u);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < feats.size(); ++i) correct += classify(model, feats[i]).ranking.front() == labels[i];
  EXPECT_EQ(correct, feats.size());
}

class CrossValidation : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new Corpus(small_corpus(4, 10));
    corpus_->manifest = assign_folds(corpus_->manifest, default_fold_sizes(40), 3);
  }
  static void TearDownTestSuite() {
    delete corpus_;
    corpus_ = nullptr;
  }
  static Corpus* corpus_;
};

Corpus* CrossValidation::corpus_ = nullptr;

TEST(CrossValidationDefaults, SeparableCorpusScoresHigh) {
  auto corpus = small_corpus(4, 10, 128);
  corpus.manifest = assign_folds(corpus.manifest, default_fold_sizes(40), 3);
  PipelineConfig cfg;
  cfg.seed = 3;
  const auto r = run_cross_validation(corpus.images, corpus.manifest, TransformVariant::PolarLineSkeletal, cfg);
  EXPECT_GE(r.top1, 0.95);
  EXPECT_EQ(r.n_test, 40u);
  EXPECT_EQ(r.num_classes, 4u);
  ASSERT_EQ(r.folds.size(), 3u);
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_EQ(r.folds[a].arrangement, static_cast<int>(a + 1));
    EXPECT_EQ(r.folds[a].test_part, kTestPartOrder[a]);
    EXPECT_EQ(r.folds[a].n_train + r.folds[a].n_test, 40u);
  }
}

TEST_F(CrossValidation, ReportInvariants) {
  for (auto v : kAllVariants) {
    const auto r = run_cross_validation(corpus_->images, corpus_->manifest, v, fast_config());
    EXPECT_LE(r.top1, r.top2);
    EXPECT_LE(r.top2, r.top3);
    double weighted = 0;
    for (const auto& f : r.folds) {
      EXPECT_LE(f.top1, f.top2);
      EXPECT_LE(f.top2, f.top3);
      weighted += f.top1 * static_cast<double>(f.n_test);
    }
    EXPECT_NEAR(r.top1, weighted / 40.0, 1e-12);
    std::size_t total = 0;
    for (const auto& row : r.confusion) {
      EXPECT_EQ(row.size(), 4u);
      for (auto n : row) total += n;
    }
    EXPECT_EQ(total, 40u);
  }
}

TEST_F(CrossValidation, Deterministic) {
  const auto a = run_cross_validation(corpus_->images, corpus_->manifest, TransformVariant::Polar, fast_config());
  const auto b = run_cross_validation(corpus_->images, corpus_->manifest, TransformVariant::Polar, fast_config());
  const std::vector<EvaluationReport> ra{a}, rb{b};
  EXPECT_EQ(report_csv(ra), report_csv(rb));
  EXPECT_EQ(confusion_csv(a), confusion_csv(b));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.folds[i].model_digest, b.folds[i].model_digest);
}

TEST_F(CrossValidation, TestImagesNeverReachTheModel) {
  const auto cfg = fast_config();
  const auto base = run_cross_validation(corpus_->images, corpus_->manifest, TransformVariant::PolarLineSkeletal, cfg);
  // Perturb one image in each fold; only arrangements that train on it may change.
  for (int fold = 0; fold < 3; ++fold) {
    auto images = corpus_->images;
    std::size_t victim = 0;
    while (*corpus_->manifest.entries[victim].fold != fold) ++victim;
    images[victim] = add_sensor_noise(images[victim], 0.2, 77);
    const auto r = run_cross_validation(images, corpus_->manifest, TransformVariant::PolarLineSkeletal, cfg);
    for (std::size_t a = 0; a < 3; ++a) {
      if (r.folds[a].test_part == fold) {
        EXPECT_EQ(r.folds[a].model_digest, base.folds[a].model_digest) << "fold " << fold;
      } else {
        EXPECT_NE(r.folds[a].model_digest, base.folds[a].model_digest) << "fold " << fold;
      }
    }
  }
}

TEST_F(CrossValidation, CompareTransformsCsv) {
  const auto reports = compare_transforms(corpus_->images, corpus_->manifest, fast_config());
  ASSERT_EQ(reports.size(), 4u);
  const auto csv = report_csv(reports);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "variant,fold,top1,top2,top3,n_test");
  std::size_t rows = 0;
  std::set<std::string> variants;
  while (std::getline(in, line)) {
    ++rows;
    variants.insert(line.substr(0, line.find(',')));
  }
  EXPECT_EQ(rows, 16u);
  EXPECT_EQ(variants, (std::set<std::string>{"raw", "line_skeletal", "polar", "polar_line_skeletal"}));
}

TEST_F(CrossValidation, UnfoldedManifestIsAssigned) {
  auto m = corpus_->manifest;
  for (auto& e : m.entries) e.fold.reset();
  const auto r = run_cross_validation(corpus_->images, m, TransformVariant::Polar, fast_config());
  EXPECT_EQ(r.n_test, 40u);
}

TEST_F(CrossValidation, SummaryAndConfusionText) {
  const auto r = run_cross_validation(corpus_->images, corpus_->manifest, TransformVariant::Polar, fast_config());
  const auto summary = summary_text(r);
  EXPECT_NE(summary.find("Top Choice"), std::string::npos);
  EXPECT_NE(summary.find("polar"), std::string::npos);
  const auto conf = confusion_csv(r);
  EXPECT_EQ(std::count(conf.begin(), conf.end(), '\n'), 5);
}
