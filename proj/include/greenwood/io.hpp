// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace greenwood {

/// Writes to a sibling temporary file and renames it into place, so a failed
/// run never leaves a partial file at `path`. Throws std::runtime_error.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Whole-file read. Throws std::runtime_error if the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Current UTC time as ISO-8601, e.g. "2026-10-16T12:00:00Z".
std::string utc_timestamp();

/// Shortest decimal string that round-trips to `v`.
std::string format_double(double v);

}  // namespace greenwood
