#pragma once

#include <string>
#include <vector>

namespace binopt {
namespace csv {

/// Shortest decimal form that round-trips through IEEE-754 binary64.
std::string format_double(double value);

double parse_double(const std::string& field);

std::vector<std::string> split_line(const std::string& line, char sep = ',');

/// Splits CSV text into non-empty lines (handles trailing newline and \r).
std::vector<std::string> split_lines(const std::string& text);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace csv
}  // namespace binopt
