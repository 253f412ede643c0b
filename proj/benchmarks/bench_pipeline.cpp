#include <benchmark/benchmark.h>

#include <vector>

#include "thermoface/eigenspace.hpp"
#include "thermoface/linefeat.hpp"
#include "thermoface/mlp.hpp"
#include "thermoface/polar.hpp"
#include "thermoface/random.hpp"
#include "thermoface/synth.hpp"

using namespace thermoface;

namespace {

void BM_LogPolarTransform(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const auto img = synth_face(1, 15.0, 1.0, size);
  const PolarConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(log_polar_transform(img, cfg));
}
BENCHMARK(BM_LogPolarTransform)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ExtractLineImage(benchmark::State& state) {
  const auto polar = log_polar_transform(synth_face(2, 0.0, 1.0, 128), PolarConfig{});
  const auto bank = default_mask_bank();
  for (auto _ : state) benchmark::DoNotOptimize(extract_line_image(polar, bank));
}
BENCHMARK(BM_ExtractLineImage)->Unit(benchmark::kMillisecond);

std::vector<FeatureVector> random_features(std::size_t n, std::size_t d) {
  Rng rng(3);
  std::vector<FeatureVector> out(n);
  for (auto& f : out) {
    f.values.resize(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values(i) = rng.uniform();
  }
  return out;
}

void BM_FitEigenspace(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto features = random_features(n, 128 * 128);
  for (auto _ : state) benchmark::DoNotOptimize(fit_eigenspace(features, 40));
}
BENCHMARK(BM_FitEigenspace)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<TrainingSample> samples;
  for (std::size_t i = 0; auto& f : random_features(n, 40)) samples.push_back({f, i++ % 16, std::nullopt});
  MlpConfig cfg;
  cfg.seed = 4;
  MlpModel model = init_model(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(train_epoch(model, samples));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_TrainEpoch)->Arg(140)->Arg(1400)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
