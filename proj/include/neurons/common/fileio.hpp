#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace neurons {

std::string read_text(const std::filesystem::path& path);

/// Writes to "<path>.tmp" then renames, creating parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace neurons
