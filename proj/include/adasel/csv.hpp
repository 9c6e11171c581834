#pragma once

// Minimal CSV helpers shared by the file formats. Fields never contain
// commas or quotes (ids are opaque tokens), so no quoting is supported.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adasel::csv {

std::vector<std::string_view> split(std::string_view line);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);

/// Reads every line of a file, stripping a trailing '\r'. Throws IoError.
std::vector<std::string> read_lines(const std::string& path);

std::string join(const std::vector<std::string>& fields);

}  // namespace adasel::csv
