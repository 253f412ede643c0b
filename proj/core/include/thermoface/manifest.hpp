#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thermoface {

inline constexpr int kNumFolds = 3;

struct ManifestEntry {
  std::string path;
  std::size_t subject = 0;
  std::optional<int> fold;

  bool operator==(const ManifestEntry&) const = default;
};

/// Labeled image list. Either every entry carries a fold in {0,1,2} or none
/// does; subject ids are below num_subjects.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::size_t num_subjects = 0;

  bool has_folds() const;
  bool operator==(const DatasetManifest&) const = default;
};

/// Parses `path,subject_id[,fold]` lines. `#` lines and blank lines are
/// skipped. num_subjects is one past the largest subject id seen.
/// Relative image paths are kept as written; see resolve_entry_path.
DatasetManifest parse_manifest(std::string_view text);
DatasetManifest load_manifest(const std::filesystem::path& path);

std::string serialize_manifest(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Relative entry paths are taken relative to the manifest's directory.
std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest_path, const ManifestEntry& entry);

}  // namespace thermoface
