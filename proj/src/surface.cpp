#include "genrestack/surface.hpp"

#include <algorithm>
#include <regex>
#include <vector>

#include "genrestack/text.hpp"

namespace genrestack {

namespace {

const std::vector<std::regex>& emoticon_patterns() {
  static const std::vector<std::regex> patterns = {
      std::regex(R"([<>}\]]?[:;=][-o'^*]?[)(\]\[dDpPoO0/\\|3*$@}{<>]+)"),
      std::regex(R"([)(\]\[dDpP/\\|]+[-o'^]?[:;=][<>]?)"),
      std::regex(R"(<\/?3+)"),
      std::regex(R"([\^T;oO\-][_.\-]?[\^T;oO\-])"),
      std::regex(R"([xX][dDpP])"),
  };
  return patterns;
}

}  // namespace

bool is_emoticon(std::string_view form) {
  if (form.size() < 2 || form.size() > 8) return false;
  if (std::all_of(form.begin(), form.end(), [](unsigned char c) { return std::isalnum(c); }) &&
      !(form.size() == 2 && (form[0] == 'x' || form[0] == 'X') &&
        std::string_view("dDpP").find(form[1]) != std::string_view::npos))
    return false;
  for (unsigned char c : form)
    if (c >= 0x80) return false;
  // "--", "..", "oo" and similar are not faces.
  if (std::all_of(form.begin(), form.end(), [&](char c) { return c == form[0]; })) return false;
  const std::string s(form);
  return std::any_of(emoticon_patterns().begin(), emoticon_patterns().end(),
                     [&](const std::regex& re) { return std::regex_match(s, re); });
}

bool has_elongation(std::string_view form) {
  auto cps = text::decode(text::to_lower(form));
  const std::size_t n = cps.size();
  for (std::size_t unit = 1; unit <= 3; ++unit) {
    for (std::size_t start = 0; start + 3 * unit <= n; ++start) {
      bool alpha = true;
      for (std::size_t k = 0; k < unit; ++k) alpha = alpha && text::is_alpha(cps[start + k]);
      if (!alpha) continue;
      std::size_t reps = 1;
      while (start + (reps + 1) * unit <= n &&
             std::equal(cps.begin() + start, cps.begin() + start + unit,
                        cps.begin() + start + reps * unit))
        ++reps;
      if (reps >= 3) return true;
    }
  }
  return false;
}

std::string word_shape(std::string_view form) {
  if (is_emoticon(form)) return "punct-emo";
  std::vector<char32_t> out;
  char32_t last = 0;
  int run = 0;
  for (char32_t c : text::decode(form)) {
    char32_t m = c;
    if (text::is_upper(c))
      m = U'X';
    else if (text::is_lower(c))
      m = U'x';
    else if (text::is_digit(c))
      m = U'd';
    run = (m == last) ? run + 1 : 1;
    last = m;
    if (run <= 4) out.push_back(m);
  }
  return text::encode(out);
}

std::string word_class(std::string_view form) {
  if (is_emoticon(form)) return "punct-emo";
  auto cps = text::decode(form);
  bool any_digit = false, all_digit = true, any_alpha = false, all_upper = true,
       all_lower = true;
  for (char32_t c : cps) {
    bool digit = text::is_digit(c);
    bool alpha = text::is_alpha(c);
    any_digit |= digit;
    all_digit &= digit;
    any_alpha |= alpha;
    if (alpha) {
      all_upper &= text::is_upper(c);
      all_lower &= text::is_lower(c);
    } else {
      all_upper = all_lower = false;
    }
  }
  if (all_digit) return "digit";
  if (any_digit) return "number";
  if (!any_alpha) return "punct";
  if (all_upper && cps.size() > 1) return "allcaps";
  if (text::is_upper(cps[0])) return "initcap";
  if (all_lower) return "lower";
  return "mixed";
}

}  // namespace genrestack
