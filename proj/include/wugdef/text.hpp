#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace wugdef {

// Splits on runs of ASCII whitespace; no empty tokens are produced.
std::vector<std::string> split_whitespace(std::string_view text);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

// ASCII-only case folding. Non-ASCII bytes pass through unchanged.
std::string lowercase_ascii(std::string_view text);

std::string trim(std::string_view text);

// Trims and replaces every internal whitespace run with a single space.
std::string collapse_whitespace(std::string_view text);

// 64-bit FNV-1a, optionally continuing from a previous state.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

// Reads every line of a text file; a trailing '\r' is stripped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Header-plus-rows view of a delimited text file. Quoting is not
// interpreted; fields are split on the delimiter verbatim.
struct DelimitedTable {
  std::filesystem::path source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws Error{MissingColumn} naming the column and the file.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

DelimitedTable read_delimited(const std::filesystem::path& path, char delimiter = '\t');

std::vector<std::string> split_on(std::string_view line, char delimiter);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace wugdef
