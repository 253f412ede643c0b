#include "thermoface/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "thermoface/atomic_file.hpp"
#include "thermoface/error.hpp"

namespace thermoface {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

long long parse_integer(std::string_view field, std::size_t line_no, const char* what) {
  field = trim(field);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": " + what + " is not an integer: '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

bool DatasetManifest::has_folds() const {
  return !entries.empty() && entries.front().fold.has_value();
}

DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest manifest;
  std::optional<bool> with_folds;
  std::size_t line_no = 0;
  std::size_t max_subject = 0;

  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;

    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 2 && fields.size() != 3) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected path,subject_id[,fold]");
    }
    const bool has_fold = fields.size() == 3;
    if (with_folds && *with_folds != has_fold) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": fold column must be present on all lines or none");
    }
    with_folds = has_fold;

    ManifestEntry entry;
    entry.path = std::string(trim(fields[0]));
    if (entry.path.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty path");

    const auto subject = parse_integer(fields[1], line_no, "subject_id");
    if (subject < 0) {
      throw Error(ErrorCode::InvalidLabel, "line " + std::to_string(line_no) + ": negative subject_id");
    }
    entry.subject = static_cast<std::size_t>(subject);
    if (has_fold) {
      const auto fold = parse_integer(fields[2], line_no, "fold");
      if (fold < 0 || fold >= kNumFolds) {
        throw Error(ErrorCode::InvalidLabel,
                    "line " + std::to_string(line_no) + ": fold " + std::to_string(fold) + " not in {0,1,2}");
      }
      entry.fold = static_cast<int>(fold);
    }
    max_subject = std::max(max_subject, entry.subject);
    manifest.entries.push_back(std::move(entry));
  }

  if (manifest.entries.empty()) throw Error(ErrorCode::ParseError, "manifest has no entries");
  manifest.num_subjects = max_subject + 1;
  return manifest;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open manifest " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str());
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    out += e.path;
    out += ',';
    out += std::to_string(e.subject);
    if (e.fold) {
      out += ',';
      out += std::to_string(*e.fold);
    }
    out += '\n';
  }
  return out;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  write_file_atomic(path, serialize_manifest(manifest));
}

fs::path resolve_entry_path(const fs::path& manifest_path, const ManifestEntry& entry) {
  fs::path p(entry.path);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

}  // namespace thermoface
