#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace genrestack {

// Gazetteer mapping single-token surface strings to entity types.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  // Types not listed in any entry are still part of the inventory.
  KnowledgeBase(std::map<std::string, std::set<std::string>> entries,
                std::size_t skipped_multiword = 0);

  const std::vector<std::string>& type_inventory() const { return types_; }
  std::size_t entry_count() const { return entries_.size(); }
  std::size_t skipped_multiword() const { return skipped_multiword_; }

  // Indices into type_inventory(); empty for a miss.
  const std::vector<std::uint32_t>& types_of(const std::string& surface) const;

 private:
  std::map<std::string, std::vector<std::uint32_t>> entries_;
  std::vector<std::string> types_;
  std::size_t skipped_multiword_ = 0;
};

// One "surface<TAB>Type1,Type2" entry per line. Repeated surfaces merge their
// types; blank lines are ignored; surfaces containing spaces are skipped and
// counted.
KnowledgeBase load_kb(std::string_view text);

struct LookupVariants {
  std::string as_is;
  std::string lowercased;
  std::string capitalized;  // first character uppercased, rest unchanged

  std::array<const std::string*, 3> all() const { return {&as_is, &lowercased, &capitalized}; }
};

LookupVariants lookup_variants(std::string_view token);

// 3 x |type_inventory| bits: one block per lookup variant (as-is, lowercased,
// capitalized), types in inventory order within each block.
using EntityFeatureVector = std::vector<std::uint8_t>;

EntityFeatureVector entity_features(const KnowledgeBase& kb, std::string_view token);

// Positions of the set bits of entity_features(), ascending.
std::vector<std::uint32_t> entity_feature_indices(const KnowledgeBase& kb, std::string_view token);

}  // namespace genrestack
