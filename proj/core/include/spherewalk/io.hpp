// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

namespace spherewalk {

/// Whole-file read; throws ValidationError if the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and renames, so readers never observe a
/// half-written file. Creates parent directories.
void write_file(const std::filesystem::path& path, const std::string& contents);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace spherewalk
