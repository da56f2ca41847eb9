// Small helpers shared by the line-oriented file readers and writers.

#ifndef RESTORO_TEXT_UTIL_H_
#define RESTORO_TEXT_UTIL_H_

#include <string>
#include <string_view>
#include <vector>

namespace restoro {

std::string trim(std::string_view s);
// Drops everything from the first '#'.
std::string_view strip_comment(std::string_view s);
// Comma-separated fields, each trimmed.
std::vector<std::string> split_fields(std::string_view line, char sep = ',');
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, long long& out);
// ASCII token without commas, whitespace or '#'.
bool is_identifier(std::string_view s);
// Shortest form for integral values, 17 significant digits otherwise;
// either way the value reads back bit-exact.
std::string format_double(double v);
// "2..8", "2,3,5" or a mix such as "1,4..6".
std::vector<int> parse_int_list(std::string_view s);

}  // namespace restoro

#endif  // RESTORO_TEXT_UTIL_H_
