#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "genrestack/corpus.hpp"

namespace genrestack {

// Exact counts; fractions are derived on demand so identities between them
// can be checked without rounding.
struct Accuracy {
  std::size_t correct = 0;
  std::size_t total = 0;

  double value() const;  // NaN when total is 0
  bool operator==(const Accuracy&) const = default;
};

struct Confusion {
  std::string gold;
  std::string predicted;
  std::size_t count = 0;

  bool operator==(const Confusion&) const = default;
};

struct EvalResult {
  Accuracy tokens;
  Accuracy sentences;  // perfectly tagged sentences
  Accuracy known;      // tokens whose form occurs in the training vocabulary
  Accuracy unknown;
  // Off-diagonal (gold, predicted) pairs by count descending, then by
  // (gold, predicted).
  std::vector<Confusion> confusions;

  double per_token() const { return tokens.value(); }
  double full_sentence() const { return sentences.value(); }
  std::size_t token_count() const { return tokens.total; }
  std::size_t sentence_count() const { return sentences.total; }

  bool operator==(const EvalResult&) const = default;
};

// Known/unknown is case-sensitive membership of the form in train_vocab.
EvalResult evaluate(const Corpus& gold, const TagSequences& predicted,
                    const Vocabulary& train_vocab);

// Error categories, tested in this order; the first match wins.
enum class ErrorCategory {
  kEmoticon,         // emoticon-shaped form
  kElongation,       // repeated letters or syllables ("sooo", "NANANANA")
  kLowercaseProper,  // gold NNP/NNPS written in lower case
  kAbbreviation,     // all-caps, 2-5 letters, wrongly tagged NNP
  kForeign,          // gold FW
  kOther,
};

inline constexpr std::size_t kErrorCategoryCount = 6;
using CategoryHistogram = std::array<std::size_t, kErrorCategoryCount>;

std::string_view category_name(ErrorCategory c);
ErrorCategory categorize_error(std::string_view form, std::string_view gold,
                               std::string_view predicted);
CategoryHistogram categorize_errors(const Corpus& gold, const TagSequences& predicted);

// Percentage of an exact fraction with two decimals, rounding half up
// ("NA" for an empty denominator).
std::string format_percent(const Accuracy& a);

// model, per_token, full_sentence, known_acc, unknown_acc as percentages;
// rows by per-token accuracy descending, ties by name. Throws when the
// results were not computed on corpora of the same size.
std::string compare_models(const std::map<std::string, EvalResult>& results);

std::string confusions_tsv(const EvalResult& result);
std::string histogram_tsv(const CategoryHistogram& histogram);

// One line per mistagged token: doc_id, sent_id, position (1-based), form,
// gold, pred, category.
std::string error_dump(const Corpus& gold, const TagSequences& predicted);

}  // namespace genrestack
