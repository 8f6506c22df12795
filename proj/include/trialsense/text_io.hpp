// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trialsense {

/// printf("%.*g") into a std::string.
std::string format_real(double value, int significant_digits = 9);

/// Strict decimal parse of the whole token (leading/trailing spaces not allowed).
/// Returns false on garbage; "nan"/"inf" parse successfully and must be checked by callers.
bool parse_real(std::string_view token, double& out);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Whole file as bytes. Throws std::runtime_error if unreadable.
std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes (truncate + write). Throws on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace trialsense
