#pragma once

#include <filesystem>
#include <string_view>

namespace spopo {

/// Write to a sibling temporary file, then rename over the target. Throws
/// std::runtime_error naming the path on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace spopo
