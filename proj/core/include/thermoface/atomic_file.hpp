#pragma once

#include <filesystem>
#include <span>
#include <string_view>

namespace thermoface {

// Writes to a sibling temporary file, then renames over the target, so a
// crash never leaves a truncated file behind. Throws Error(WriteFailure).
void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace thermoface
