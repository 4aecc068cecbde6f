#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace factguard::io {

/// Writes `content` to a temporary sibling and renames it over `path`, so
/// readers never observe a torn file. Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Whole-file read; throws InputError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace factguard::io
