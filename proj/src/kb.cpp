#include "genrestack/kb.hpp"

#include <algorithm>

#include "genrestack/error.hpp"
#include "genrestack/text.hpp"

namespace genrestack {

KnowledgeBase::KnowledgeBase(std::map<std::string, std::set<std::string>> entries,
                             std::size_t skipped_multiword)
    : skipped_multiword_(skipped_multiword) {
  std::set<std::string> all;
  for (const auto& [surface, types] : entries) all.insert(types.begin(), types.end());
  types_.assign(all.begin(), all.end());
  for (const auto& [surface, types] : entries) {
    std::vector<std::uint32_t> ids;
    for (const auto& t : types) {
      auto it = std::lower_bound(types_.begin(), types_.end(), t);
      ids.push_back(static_cast<std::uint32_t>(it - types_.begin()));
    }
    entries_.emplace(surface, std::move(ids));
  }
}

const std::vector<std::uint32_t>& KnowledgeBase::types_of(const std::string& surface) const {
  static const std::vector<std::uint32_t> none;
  auto it = entries_.find(surface);
  return it == entries_.end() ? none : it->second;
}

KnowledgeBase load_kb(std::string_view text) {
  std::map<std::string, std::set<std::string>> entries;
  std::size_t skipped = 0;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError("gazetteer line has no tab", line_no);
    auto surface = line.substr(0, tab);
    if (surface.empty()) throw ParseError("empty gazetteer surface", line_no);
    std::set<std::string> types;
    for (const auto& t : text::split(line.substr(tab + 1), ',')) {
      auto type = text::trim(t);
      if (type.empty()) throw ParseError("empty entity type list", line_no);
      types.emplace(type);
    }
    if (surface.find(' ') != std::string_view::npos) {
      ++skipped;
      continue;
    }
    entries[std::string(surface)].merge(types);
  }
  return KnowledgeBase(std::move(entries), skipped);
}

LookupVariants lookup_variants(std::string_view token) {
  return {std::string(token), text::to_lower(token), text::capitalize_first(token)};
}

std::vector<std::uint32_t> entity_feature_indices(const KnowledgeBase& kb, std::string_view token) {
  const auto n = static_cast<std::uint32_t>(kb.type_inventory().size());
  std::vector<std::uint32_t> out;
  if (n == 0) return out;
  auto variants = lookup_variants(token);
  std::uint32_t block = 0;
  for (const auto* v : variants.all()) {
    for (auto t : kb.types_of(*v)) out.push_back(block * n + t);
    ++block;
  }
  return out;
}

EntityFeatureVector entity_features(const KnowledgeBase& kb, std::string_view token) {
  EntityFeatureVector bits(3 * kb.type_inventory().size(), 0);
  for (auto i : entity_feature_indices(kb, token)) bits[i] = 1;
  return bits;
}

}  // namespace genrestack
