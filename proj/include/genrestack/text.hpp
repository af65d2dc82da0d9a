#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers. Case mapping is Unicode simple (1:1) case mapping with no
// locale tailoring, so results are identical on every platform.
namespace genrestack::text {

// Decodes UTF-8; invalid sequences decode to U+FFFD.
std::vector<char32_t> decode(std::string_view s);
std::string encode(const std::vector<char32_t>& cps);
std::size_t length(std::string_view s);

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
// First code point uppercased, the remainder unchanged.
std::string capitalize_first(std::string_view s);

// First / last n code points (the whole string when it is shorter).
std::string prefix(std::string_view s, std::size_t n);
std::string suffix(std::string_view s, std::size_t n);

bool is_upper(char32_t c);
bool is_lower(char32_t c);
bool is_alpha(char32_t c);
bool is_digit(char32_t c);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace genrestack::text
