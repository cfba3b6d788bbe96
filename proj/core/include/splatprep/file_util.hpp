#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace splatprep {

/// Reads a whole file into memory. Throws InputError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes `bytes` to a sibling temp file and renames it over `path`, so a
/// reader never observes a partially written output.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Creates `dir` (and parents) if needed. Throws InputError if that fails or
/// `dir` exists as a non-directory.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace splatprep
