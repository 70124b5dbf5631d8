#pragma once

// Small string helpers shared by the extractors, parsers and reporters.

#include <string>
#include <string_view>
#include <vector>

namespace promptforge::text {

std::string_view trim(std::string_view s);
std::string_view trim_left(std::string_view s);
std::string_view trim_right(std::string_view s);

bool is_blank(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

/// Splits on '\n'; a trailing newline does not produce an empty last element.
std::vector<std::string_view> split_lines(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Collapses every run of whitespace into a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);
std::string remove_whitespace(std::string_view s);

std::string replace_all(std::string s, std::string_view from, std::string_view to);
std::size_t count_occurrences(std::string_view s, std::string_view needle);

/// Single-quotes a string for /bin/sh.
std::string shell_quote(std::string_view s);

std::string sha256_hex(std::string_view data);

/// Formats with a fixed number of decimals ("%.Nf"), never locale dependent.
std::string fixed(double value, int decimals);

/// Approximate token count: whitespace-separated units times 1.3, rounded up.
std::size_t estimate_tokens(std::string_view s);

/// One RFC-4180 style CSV record (quoted fields may contain commas and "").
std::vector<std::string> parse_csv_record(std::string_view line);
std::string csv_escape(std::string_view field);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace promptforge::text
