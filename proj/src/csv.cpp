#include "skyoctopus/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>

#include "skyoctopus/error.hpp"

namespace skyoct {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<CsvRecord> read_csv(std::istream& in) {
  std::vector<CsvRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    CsvRecord rec;
    rec.line = line_no;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      const std::string_view field = view.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      rec.fields.emplace_back(trim(field));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<CsvRecord> read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kLoad, "cannot open '" + path + "'");
  return read_csv(in);
}

double parse_double(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail(ErrorKind::kInput, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

long long parse_int(std::string_view text) {
  text = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail(ErrorKind::kInput, "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::string format_value(double value) {
  if (value == 0.0) value = 0.0;  // folds -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

}  // namespace skyoct
