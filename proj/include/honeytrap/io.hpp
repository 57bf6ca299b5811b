#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace honeytrap {

/// Whole file as text. Throws std::runtime_error naming the path on failure.
std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames it over path, so readers
/// never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace honeytrap
