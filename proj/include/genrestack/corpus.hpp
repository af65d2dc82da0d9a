#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace genrestack {

struct Token {
  std::string form;
  std::string tag;  // XPOS

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::string doc_id;
  std::string sent_id;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

using TagSequence = std::vector<std::string>;
using TagSequences = std::vector<TagSequence>;  // one per sentence
using Vocabulary = std::set<std::string>;

// Closed tag inventory, sorted lexicographically. Index positions are the
// column order of every one-hot encoding built over the set.
class TagSet {
 public:
  TagSet() = default;
  explicit TagSet(std::vector<std::string> tags);

  std::size_t size() const { return tags_.size(); }
  bool empty() const { return tags_.empty(); }
  const std::string& at(std::size_t index) const { return tags_.at(index); }
  const std::vector<std::string>& tags() const { return tags_; }

  std::optional<std::size_t> find(std::string_view tag) const;
  bool contains(std::string_view tag) const { return find(tag).has_value(); }
  // Throws genrestack::Error for a tag outside the set.
  std::size_t index_of(std::string_view tag) const;
  bool includes(const TagSet& other) const;

  static TagSet union_of(const TagSet& a, const TagSet& b);

  bool operator==(const TagSet&) const = default;

 private:
  std::vector<std::string> tags_;
};

// A genre-labelled collection of gold-tagged sentences. Immutable once built;
// the constructor validates token forms and (doc_id, sent_id) uniqueness and
// derives the tag set from the tokens.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::string genre, std::vector<Sentence> sentences);

  const std::string& genre() const { return genre_; }
  const std::vector<Sentence>& sentences() const { return sentences_; }
  const TagSet& tagset() const { return tagset_; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  std::size_t token_count() const { return token_count_; }

  TagSequences gold_tags() const;

 private:
  std::string genre_;
  std::vector<Sentence> sentences_;
  TagSet tagset_;
  std::size_t token_count_ = 0;
};

inline constexpr std::string_view kPlaceholderTag = "X-UNK";

struct ParseOptions {
  // Substitute kPlaceholderTag for an XPOS of "_" instead of failing.
  bool permissive_xpos = false;
};

// FORM is column 2 and XPOS column 5. Multiword ranges ("3-4") and empty
// nodes ("5.1") are skipped. "# newdoc id" and "# sent_id" comments supply
// ids; a missing sent_id is the sentence's 1-based ordinal in the file, and
// sentences before any "# newdoc" each get their own numbered document.
Corpus parse_conllu(std::string_view text, std::string genre, ParseOptions options = {});

// Token lines carry the gold XPOS; predictions, when given, go to MISC as
// PredXPOS=<tag>.
std::string write_conllu(const Corpus& corpus);
std::string write_conllu(const Corpus& corpus, const TagSequences& predicted);

enum class PredictionSource {
  kMisc,  // PredXPOS=<tag> in the MISC column
  kXpos,  // the XPOS column of a tagger's own CoNLL-U output
};

// Reads predicted tags from CoNLL-U aligned sentence-by-sentence with gold.
TagSequences read_predictions(std::string_view text, const Corpus& gold, PredictionSource source);

// Throws if predicted does not mirror the sentence lengths of corpus; the
// message names the first offending sentence.
void check_shape(const Corpus& corpus, const TagSequences& predicted, std::string_view what);

enum class SplitUnit { kDocument, kSentence };
enum class Split { kTrain = 0, kDev = 1, kTest = 2 };

std::string_view split_name(Split s);

struct SplitSpec {
  SplitUnit unit = SplitUnit::kDocument;
  std::array<std::size_t, 3> sizes{};  // target tokens for train, dev, test
  std::uint64_t seed = 1;
};

struct SplitResult {
  Corpus train;
  Corpus dev;
  Corpus test;
  // Unit key (doc_id, or doc_id/sent_id for sentence units) and assigned
  // split, in corpus order of first appearance.
  std::vector<std::pair<std::string, Split>> manifest;

  const Corpus& part(Split s) const;
};

// Units are shuffled with the seed, laid end to end, and each goes to the
// split whose proportional token range contains the unit's midpoint, so each
// split lands within one unit of its scaled target and the corpus is
// partitioned exactly.
SplitResult make_splits(const Corpus& corpus, const SplitSpec& spec);

// One "key<TAB>split" line per unit.
std::string write_manifest(const SplitResult& result);

// Sentences in list order. Corpora whose (doc_id, sent_id) pairs collide with
// an earlier corpus get "<genre>:" prefixed to their doc ids.
Corpus concat(const std::vector<Corpus>& corpora, std::string genre);

Vocabulary vocabulary(const Corpus& corpus);

}  // namespace genrestack
