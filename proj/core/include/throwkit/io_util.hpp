#pragma once

#include <string>

namespace throwkit {

/// Reads a whole file; throws ConfigError when the file cannot be opened.
std::string read_file(const std::string& path);

/// Writes via a temporary file in the same directory followed by rename,
/// so concurrent readers never observe a partial artifact.
/// Throws WriteError on failure.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace throwkit
