#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "thermoface/config.hpp"
#include "thermoface/evaluation.hpp"

namespace thermoface {

inline constexpr std::uint8_t kModelFormatVersion = 1;

/// Everything needed to identify new images: the config snapshot the model
/// was trained with, the eigenspace/network pair, and display names.
///
/// Layout (little-endian): 8-byte magic "TFACEMDL", version byte, u32 block
/// count, then blocks of {4-byte tag, u64 payload length, payload}:
///   CONF  canonical config text
///   EIGN  u64 d, u64 k, mean[d], eigenvalues[k], basis column-major [d*k] (f64)
///   MLPN  layer sizes, hyperparameters, epoch count, weights, biases, velocities
///   LABL  u64 count, then per label {u64 id, u64 length, bytes}
struct ModelFile {
  PipelineConfig config;
  TrainedPipeline model;
  std::vector<std::string> labels;  // index = subject id
};

std::vector<unsigned char> serialize_model(const ModelFile& file);
/// Validates magic, version, and every block length. Throws VersionMismatch
/// on bad magic or version and ParseError on malformed blocks.
ModelFile deserialize_model(std::span<const unsigned char> bytes);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

}  // namespace thermoface
