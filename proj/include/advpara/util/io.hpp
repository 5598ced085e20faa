#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace advpara {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// printf-style "%.*f" without locale surprises.
std::string format_fixed(double value, int decimals);

// Shortest round-trip representation of a double.
std::string format_double(double value);

}  // namespace advpara
