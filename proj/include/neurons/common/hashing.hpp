#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace neurons {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(std::string_view text);

/// SHA-256 over a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Order-independent digest of a directory tree: sorted relative paths
/// paired with file digests.
std::string sha256_tree(const std::filesystem::path& dir);

}  // namespace neurons
