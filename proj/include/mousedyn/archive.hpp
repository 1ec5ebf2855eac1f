#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mousedyn {

/// Hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

/// Extracts a .zip archive (stored and deflate entries) into dest_dir.
/// Entry paths escaping dest_dir are rejected. Returns the number of files
/// written.
std::size_t extract_zip(const std::filesystem::path& archive,
                        const std::filesystem::path& dest_dir);

}  // namespace mousedyn
