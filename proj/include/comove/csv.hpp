#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace comove::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  // Index of a header column; throws InputError when absent.
  std::size_t column(std::string_view name) const;
};

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(std::string_view line);

// Reads a headered CSV file. Blank lines and lines starting with '#' are skipped.
Table read(const std::filesystem::path& path);
Table parse(std::istream& in, const std::string& source_name);

std::string quote(std::string_view field);
void write_record(std::ostream& out, const std::vector<std::string>& fields);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
// Fixed-point text with the given number of decimals.
std::string format_fixed(double value, int decimals);

// Full-match numeric parse; returns false on any trailing characters.
bool parse_double(std::string_view text, double& out);

std::string_view trim(std::string_view text);

}  // namespace comove::csv
