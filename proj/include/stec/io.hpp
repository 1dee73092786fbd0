#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stec::io {

// Writes to a sibling temporary file and renames it over `path`, so a failed
// write never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

// Lines without trailing '\r'; a final empty line is dropped.
std::vector<std::string_view> split_lines(std::string_view text);

// %.9g
std::string format_sig9(double v);

// Parse helpers throw ValidationError with "<source> line L, column C (name): ...".
struct FieldContext {
  std::string_view source;
  std::size_t line;
  std::size_t column;
  std::string_view name;
};

double parse_double(std::string_view text, const FieldContext& ctx);
long long parse_int(std::string_view text, const FieldContext& ctx);

}  // namespace stec::io
