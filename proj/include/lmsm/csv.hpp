#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lmsm::csv {

/// 17 significant digits, '.' decimal separator; parses back to the same double.
std::string num(double x);

/// Splits one line on commas (no quoting; the files written here never need it).
std::vector<std::string> split(const std::string& line);

/// Strict string to double; throws std::invalid_argument on trailing garbage.
double parse_double(const std::string& s);
long long parse_int(const std::string& s);

/// Reads the next line that is neither empty nor a '#' comment.
bool next_record(std::istream& in, std::string& line);

}  // namespace lmsm::csv
