#include "genrestack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "genrestack/error.hpp"
#include "genrestack/surface.hpp"
#include "genrestack/text.hpp"

namespace genrestack {

double Accuracy::value() const {
  if (total == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(correct) / static_cast<double>(total);
}

EvalResult evaluate(const Corpus& gold, const TagSequences& predicted,
                    const Vocabulary& train_vocab) {
  check_shape(gold, predicted, "evaluate");
  EvalResult r;
  std::map<std::pair<std::string, std::string>, std::size_t> confusions;
  for (std::size_t si = 0; si < gold.size(); ++si) {
    const auto& s = gold.sentences()[si];
    bool perfect = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& t = s.tokens[i];
      const bool ok = t.tag == predicted[si][i];
      Accuracy& bucket = train_vocab.count(t.form) ? r.known : r.unknown;
      ++bucket.total;
      ++r.tokens.total;
      if (ok) {
        ++bucket.correct;
        ++r.tokens.correct;
      } else {
        perfect = false;
        ++confusions[{t.tag, predicted[si][i]}];
      }
    }
    ++r.sentences.total;
    if (perfect) ++r.sentences.correct;
  }
  for (const auto& [pair, count] : confusions) r.confusions.push_back({pair.first, pair.second, count});
  std::stable_sort(r.confusions.begin(), r.confusions.end(),
                   [](const Confusion& a, const Confusion& b) { return a.count > b.count; });
  return r;
}

std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kEmoticon: return "emoticon";
    case ErrorCategory::kElongation: return "elongation";
    case ErrorCategory::kLowercaseProper: return "lowercase-proper";
    case ErrorCategory::kAbbreviation: return "abbreviation";
    case ErrorCategory::kForeign: return "foreign";
    case ErrorCategory::kOther: return "other";
  }
  return "other";
}

namespace {

bool is_all_caps_abbreviation(std::string_view form) {
  auto cps = text::decode(form);
  if (cps.size() < 2 || cps.size() > 5) return false;
  return std::all_of(cps.begin(), cps.end(),
                     [](char32_t c) { return text::is_alpha(c) && text::is_upper(c); });
}

}  // namespace

ErrorCategory categorize_error(std::string_view form, std::string_view gold,
                               std::string_view predicted) {
  if (is_emoticon(form)) return ErrorCategory::kEmoticon;
  if (has_elongation(form)) return ErrorCategory::kElongation;
  if (gold == "NNP" || gold == "NNPS") {
    auto cps = text::decode(form);
    if (!cps.empty() && text::is_lower(cps[0])) return ErrorCategory::kLowercaseProper;
  }
  if (predicted == "NNP" && is_all_caps_abbreviation(form)) return ErrorCategory::kAbbreviation;
  if (gold == "FW") return ErrorCategory::kForeign;
  return ErrorCategory::kOther;
}

CategoryHistogram categorize_errors(const Corpus& gold, const TagSequences& predicted) {
  check_shape(gold, predicted, "categorize_errors");
  CategoryHistogram h{};
  for (std::size_t si = 0; si < gold.size(); ++si) {
    const auto& s = gold.sentences()[si];
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.tokens[i].tag == predicted[si][i]) continue;
      ++h[static_cast<std::size_t>(
          categorize_error(s.tokens[i].form, s.tokens[i].tag, predicted[si][i]))];
    }
  }
  return h;
}

std::string format_percent(const Accuracy& a) {
  if (a.total == 0) return "NA";
  // round(correct * 10000 / total) with halves rounded up, in integers.
  const unsigned __int128 num = static_cast<unsigned __int128>(a.correct) * 20000 + a.total;
  const auto hundredths = static_cast<std::uint64_t>(num / (2 * static_cast<unsigned __int128>(a.total)));
  auto frac = hundredths % 100;
  return std::to_string(hundredths / 100) + "." + (frac < 10 ? "0" : "") + std::to_string(frac);
}

std::string compare_models(const std::map<std::string, EvalResult>& results) {
  std::vector<std::pair<std::string, const EvalResult*>> rows;
  std::optional<std::pair<std::size_t, std::size_t>> shape;
  for (const auto& [name, r] : results) {
    std::pair<std::size_t, std::size_t> this_shape{r.token_count(), r.sentence_count()};
    if (shape && *shape != this_shape)
      throw Error("result '" + name + "' was computed on a different gold corpus (" +
                  std::to_string(r.token_count()) + " tokens vs " +
                  std::to_string(shape->first) + ")");
    shape = this_shape;
    rows.emplace_back(name, &r);
  }
  // Exact rational comparison: a/b > c/d  <=>  a*d > c*b.
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    const auto& x = a.second->tokens;
    const auto& y = b.second->tokens;
    return static_cast<unsigned __int128>(x.correct) * y.total >
           static_cast<unsigned __int128>(y.correct) * x.total;
  });
  std::ostringstream os;
  os << "model\tper_token\tfull_sentence\tknown_acc\tunknown_acc\n";
  for (const auto& [name, r] : rows)
    os << name << '\t' << format_percent(r->tokens) << '\t' << format_percent(r->sentences) << '\t'
       << format_percent(r->known) << '\t' << format_percent(r->unknown) << '\n';
  return os.str();
}

std::string confusions_tsv(const EvalResult& result) {
  std::ostringstream os;
  os << "gold\tpredicted\tcount\n";
  for (const auto& c : result.confusions) os << c.gold << '\t' << c.predicted << '\t' << c.count << '\n';
  return os.str();
}

std::string histogram_tsv(const CategoryHistogram& histogram) {
  std::ostringstream os;
  os << "category\tcount\n";
  for (std::size_t i = 0; i < kErrorCategoryCount; ++i)
    os << category_name(static_cast<ErrorCategory>(i)) << '\t' << histogram[i] << '\n';
  return os.str();
}

std::string error_dump(const Corpus& gold, const TagSequences& predicted) {
  check_shape(gold, predicted, "error_dump");
  std::ostringstream os;
  os << "doc_id\tsent_id\tposition\tform\tgold\tpred\tcategory\n";
  for (std::size_t si = 0; si < gold.size(); ++si) {
    const auto& s = gold.sentences()[si];
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& t = s.tokens[i];
      if (t.tag == predicted[si][i]) continue;
      os << s.doc_id << '\t' << s.sent_id << '\t' << (i + 1) << '\t' << t.form << '\t' << t.tag
         << '\t' << predicted[si][i] << '\t'
         << category_name(categorize_error(t.form, t.tag, predicted[si][i])) << '\n';
    }
  }
  return os.str();
}

}  // namespace genrestack
