#include "genrestack/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace genrestack::text {

std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const int32_t n = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(bytes, i, n, c);
    out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
  }
  return out;
}

std::string encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t c : cps) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool err = false;
    U8_APPEND(buf, len, U8_MAX_LENGTH, static_cast<UChar32>(c), err);
    if (err) {
      out += "\xEF\xBF\xBD";
      continue;
    }
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
  }
  return out;
}

std::size_t length(std::string_view s) { return decode(s).size(); }

std::string to_lower(std::string_view s) {
  auto cps = decode(s);
  for (auto& c : cps) c = static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
  return encode(cps);
}

std::string to_upper(std::string_view s) {
  auto cps = decode(s);
  for (auto& c : cps) c = static_cast<char32_t>(u_toupper(static_cast<UChar32>(c)));
  return encode(cps);
}

std::string capitalize_first(std::string_view s) {
  auto cps = decode(s);
  if (!cps.empty()) cps[0] = static_cast<char32_t>(u_toupper(static_cast<UChar32>(cps[0])));
  return encode(cps);
}

std::string prefix(std::string_view s, std::size_t n) {
  auto cps = decode(s);
  if (cps.size() > n) cps.resize(n);
  return encode(cps);
}

std::string suffix(std::string_view s, std::size_t n) {
  auto cps = decode(s);
  if (cps.size() > n) cps.erase(cps.begin(), cps.end() - static_cast<std::ptrdiff_t>(n));
  return encode(cps);
}

bool is_upper(char32_t c) { return u_isupper(static_cast<UChar32>(c)); }
bool is_lower(char32_t c) { return u_islower(static_cast<UChar32>(c)); }
bool is_alpha(char32_t c) { return u_isalpha(static_cast<UChar32>(c)); }
bool is_digit(char32_t c) { return u_isdigit(static_cast<UChar32>(c)); }

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace genrestack::text
