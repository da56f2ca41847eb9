#include "restoro/text_util.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace restoro {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string_view strip_comment(std::string_view s) {
  const auto pos = s.find('#');
  return pos == std::string_view::npos ? s : s.substr(0, pos);
}

std::vector<std::string> split_fields(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, long long& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (u > 127 || std::isspace(u) || c == ',' || c == '#') return false;
  }
  return true;
}

std::string format_double(double v) {
  char buf[64];
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    if (std::string_view(buf) == "-0") return "0";
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", v);
  }
  return buf;
}

std::vector<int> parse_int_list(std::string_view s) {
  std::vector<int> out;
  for (const auto& part : split_fields(s)) {
    const auto dots = part.find("..");
    long long lo = 0;
    long long hi = 0;
    if (dots == std::string::npos) {
      if (!parse_int(part, lo)) {
        throw std::invalid_argument("bad integer list '" + std::string(s) + "'");
      }
      hi = lo;
    } else if (!parse_int(std::string_view(part).substr(0, dots), lo) ||
               !parse_int(std::string_view(part).substr(dots + 2), hi) ||
               hi < lo) {
      throw std::invalid_argument("bad integer range '" + part + "'");
    }
    for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace restoro
