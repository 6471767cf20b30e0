#pragma once

#include <string>
#include <string_view>

namespace circa {

std::string read_file(const std::string& path);
// Creates parent directories as needed.
void write_file(const std::string& path, std::string_view contents);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
// Throws ParseError unless the whole token is a number.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

}  // namespace circa
