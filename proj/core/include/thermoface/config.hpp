#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "thermoface/linefeat.hpp"
#include "thermoface/mlp.hpp"
#include "thermoface/polar.hpp"

namespace thermoface {

enum class TransformVariant { Raw, LineSkeletal, Polar, PolarLineSkeletal };

inline constexpr std::array<TransformVariant, 4> kAllVariants = {
    TransformVariant::Raw, TransformVariant::LineSkeletal, TransformVariant::Polar,
    TransformVariant::PolarLineSkeletal};

std::string_view to_string(TransformVariant v);
// Throws InvalidParameter for unknown names.
TransformVariant parse_variant(std::string_view name);

struct EvalConfig {
  TransformVariant variant = TransformVariant::PolarLineSkeletal;
  // Fold sizes for manifests without a fold column; 7:7:6 of the total when unset.
  std::optional<std::array<std::size_t, 3>> fold_sizes;

  bool operator==(const EvalConfig&) const = default;
};

struct SynthConfig {
  std::size_t size = 128;
  double noise = 0.02;

  bool operator==(const SynthConfig&) const = default;
};

struct IoConfig {
  std::string manifest;
  std::string model;
  std::string output_dir;

  bool operator==(const IoConfig&) const = default;
};

/// Every tunable of the pipeline. Text form is flat `key = value` lines with
/// dotted section keys; missing keys keep their defaults.
struct PipelineConfig {
  std::uint64_t seed = 0;
  PolarConfig polar;
  LineFeatureConfig linefeat;
  std::size_t pca_k = 40;
  MlpConfig mlp;
  EvalConfig eval;
  SynthConfig synth;
  IoConfig io;

  void validate() const;

  // Applies one `key=value` override. Throws ParseError on unknown keys or
  // malformed values.
  void set(std::string_view key, std::string_view value);

  bool operator==(const PipelineConfig&) const = default;
};

inline constexpr std::string_view kConfigEnvVar = "THERMOFACE_CONFIG";

PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical text form: every key, sorted, reals printed round-trip exact.
std::string serialize_config(const PipelineConfig& cfg);

}  // namespace thermoface
