#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace skyoct {

struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// Comma-separated, no quoting. Blank lines and lines starting with '#' are
// skipped; fields are trimmed.
std::vector<CsvRecord> read_csv(std::istream& in);
std::vector<CsvRecord> read_csv_file(const std::string& path);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

// Fixed six-decimal rendering so that identical values always produce
// identical bytes.
std::string format_value(double value);

}  // namespace skyoct
