#include "genrestack/corpus.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "genrestack/error.hpp"
#include "genrestack/random.hpp"
#include "genrestack/text.hpp"

namespace genrestack {

TagSet::TagSet(std::vector<std::string> tags) : tags_(std::move(tags)) {
  std::sort(tags_.begin(), tags_.end());
  tags_.erase(std::unique(tags_.begin(), tags_.end()), tags_.end());
}

std::optional<std::size_t> TagSet::find(std::string_view tag) const {
  auto it = std::lower_bound(tags_.begin(), tags_.end(), tag);
  if (it == tags_.end() || *it != tag) return std::nullopt;
  return static_cast<std::size_t>(it - tags_.begin());
}

std::size_t TagSet::index_of(std::string_view tag) const {
  if (auto i = find(tag)) return *i;
  throw Error("tag '" + std::string(tag) + "' is not in the tag set");
}

bool TagSet::includes(const TagSet& other) const {
  return std::includes(tags_.begin(), tags_.end(), other.tags_.begin(), other.tags_.end());
}

TagSet TagSet::union_of(const TagSet& a, const TagSet& b) {
  std::vector<std::string> all;
  std::set_union(a.tags_.begin(), a.tags_.end(), b.tags_.begin(), b.tags_.end(),
                 std::back_inserter(all));
  TagSet out;
  out.tags_ = std::move(all);
  return out;
}

Corpus::Corpus(std::string genre, std::vector<Sentence> sentences)
    : genre_(std::move(genre)), sentences_(std::move(sentences)) {
  std::set<std::pair<std::string_view, std::string_view>> ids;
  std::vector<std::string> tags;
  for (const auto& s : sentences_) {
    if (s.tokens.empty()) throw Error("sentence '" + s.sent_id + "' has no tokens");
    if (!ids.emplace(s.doc_id, s.sent_id).second)
      throw Error("duplicate sentence id '" + s.sent_id + "' in document '" + s.doc_id + "'");
    for (const auto& t : s.tokens) {
      if (t.form.empty()) throw Error("empty token form in sentence '" + s.sent_id + "'");
      if (t.form.find_first_of(std::string_view("\t\n\0", 3)) != std::string::npos)
        throw Error("token form contains a tab, newline or NUL in sentence '" + s.sent_id + "'");
      if (t.tag.empty()) throw Error("empty tag in sentence '" + s.sent_id + "'");
      tags.push_back(t.tag);
    }
    token_count_ += s.tokens.size();
  }
  tagset_ = TagSet(std::move(tags));
}

TagSequences Corpus::gold_tags() const {
  TagSequences out;
  out.reserve(sentences_.size());
  for (const auto& s : sentences_) {
    TagSequence tags;
    tags.reserve(s.size());
    for (const auto& t : s.tokens) tags.push_back(t.tag);
    out.push_back(std::move(tags));
  }
  return out;
}

namespace {

struct ParsedLine {
  Token token;
  std::string misc;
};

struct ParsedSentence {
  Sentence sentence;
  std::vector<std::string> misc;
  std::size_t first_line = 0;
};

std::optional<std::string> comment_value(std::string_view body, std::string_view key) {
  if (body.substr(0, key.size()) != key) return std::nullopt;
  auto rest = body.substr(key.size());
  if (!rest.empty() && rest.front() != ' ' && rest.front() != '=' && rest.front() != '\t')
    return std::nullopt;
  rest = text::trim(rest);
  if (!rest.empty() && rest.front() == '=') rest = text::trim(rest.substr(1));
  return std::string(rest);
}

std::vector<ParsedSentence> parse_sentences(std::string_view text, const ParseOptions& options) {
  std::vector<ParsedSentence> out;
  ParsedSentence current;
  std::optional<std::string> pending_sent_id;
  std::optional<std::string> doc_id;
  std::size_t doc_counter = 0;
  std::size_t line_no = 0;

  auto finish = [&] {
    if (current.sentence.tokens.empty()) {
      pending_sent_id.reset();
      return;
    }
    auto ordinal = out.size() + 1;
    current.sentence.sent_id = pending_sent_id ? *pending_sent_id : std::to_string(ordinal);
    if (doc_id) {
      current.sentence.doc_id = *doc_id;
    } else {
      current.sentence.doc_id = std::to_string(++doc_counter);
    }
    out.push_back(std::move(current));
    current = {};
    pending_sent_id.reset();
  };

  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (text::trim(line).empty()) {
      finish();
      continue;
    }
    if (line.front() == '#') {
      if (!current.sentence.tokens.empty()) continue;
      auto body = text::trim(line.substr(1));
      if (auto v = comment_value(body, "newdoc id")) {
        doc_id = *v;
      } else if (body == "newdoc") {
        doc_id = std::to_string(++doc_counter);
      } else if (auto s = comment_value(body, "sent_id")) {
        pending_sent_id = *s;
      }
      continue;
    }

    auto cols = text::split(line, '\t');
    if (cols.size() < 5)
      throw ParseError("token line has " + std::to_string(cols.size()) +
                           " tab-separated columns, expected at least 5",
                       line_no);
    const auto& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
    if (cols[1].empty()) throw ParseError("empty FORM column", line_no);
    if (cols[1].find('\0') != std::string::npos) throw ParseError("NUL byte in FORM", line_no);
    std::string tag = cols[4];
    if (tag.empty()) throw ParseError("empty XPOS column", line_no);
    if (tag == "_") {
      if (!options.permissive_xpos)
        throw ParseError("XPOS is '_' (use the permissive option to substitute " +
                             std::string(kPlaceholderTag) + ")",
                         line_no);
      tag = std::string(kPlaceholderTag);
    }
    if (current.sentence.tokens.empty()) current.first_line = line_no;
    current.sentence.tokens.push_back({cols[1], std::move(tag)});
    current.misc.push_back(cols.size() >= 10 ? cols[9] : std::string("_"));
  }
  finish();
  if (out.empty()) throw ParseError("input contains no sentences", 0);
  return out;
}

std::string write_impl(const Corpus& corpus, const TagSequences* predicted) {
  if (predicted) check_shape(corpus, *predicted, "predictions");
  std::ostringstream os;
  std::optional<std::string_view> last_doc;
  for (std::size_t si = 0; si < corpus.size(); ++si) {
    const auto& s = corpus.sentences()[si];
    if (!last_doc || *last_doc != s.doc_id) {
      os << "# newdoc id = " << s.doc_id << '\n';
      last_doc = s.doc_id;
    }
    os << "# sent_id = " << s.sent_id << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& t = s.tokens[i];
      os << (i + 1) << '\t' << t.form << "\t_\t_\t" << t.tag << "\t_\t_\t_\t_\t";
      if (predicted)
        os << "PredXPOS=" << (*predicted)[si][i];
      else
        os << '_';
      os << '\n';
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace

Corpus parse_conllu(std::string_view text, std::string genre, ParseOptions options) {
  auto parsed = parse_sentences(text, options);
  std::vector<Sentence> sentences;
  sentences.reserve(parsed.size());
  for (auto& p : parsed) sentences.push_back(std::move(p.sentence));
  return Corpus(std::move(genre), std::move(sentences));
}

std::string write_conllu(const Corpus& corpus) { return write_impl(corpus, nullptr); }

std::string write_conllu(const Corpus& corpus, const TagSequences& predicted) {
  return write_impl(corpus, &predicted);
}

TagSequences read_predictions(std::string_view text, const Corpus& gold, PredictionSource source) {
  auto parsed = parse_sentences(text, ParseOptions{.permissive_xpos = true});
  if (parsed.size() != gold.size())
    throw Error("prediction file has " + std::to_string(parsed.size()) +
                " sentences, gold has " + std::to_string(gold.size()));
  TagSequences out;
  out.reserve(parsed.size());
  for (std::size_t si = 0; si < parsed.size(); ++si) {
    const auto& p = parsed[si];
    const auto& g = gold.sentences()[si];
    if (p.sentence.size() != g.size())
      throw Error("prediction length mismatch in sentence '" + g.sent_id + "'");
    TagSequence tags;
    for (std::size_t i = 0; i < p.sentence.size(); ++i) {
      if (source == PredictionSource::kXpos) {
        tags.push_back(p.sentence.tokens[i].tag);
        continue;
      }
      std::optional<std::string> pred;
      for (const auto& item : text::split(p.misc[i], '|')) {
        if (item.rfind("PredXPOS=", 0) == 0) pred = item.substr(9);
      }
      if (!pred || pred->empty())
        throw ParseError("token without PredXPOS in MISC (sentence '" + g.sent_id + "')",
                         p.first_line + i);
      tags.push_back(std::move(*pred));
    }
    out.push_back(std::move(tags));
  }
  return out;
}

void check_shape(const Corpus& corpus, const TagSequences& predicted, std::string_view what) {
  if (predicted.size() != corpus.size())
    throw Error(std::string(what) + ": " + std::to_string(predicted.size()) +
                " sequences for " + std::to_string(corpus.size()) + " sentences");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus.sentences()[i];
    if (predicted[i].size() != s.size())
      throw Error(std::string(what) + ": sentence '" + s.sent_id + "' (document '" + s.doc_id +
                  "') has " + std::to_string(s.size()) + " tokens but " +
                  std::to_string(predicted[i].size()) + " tags");
  }
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "?";
}

const Corpus& SplitResult::part(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kDev: return dev;
    case Split::kTest: return test;
  }
  return train;
}

SplitResult make_splits(const Corpus& corpus, const SplitSpec& spec) {
  const std::size_t target_total = spec.sizes[0] + spec.sizes[1] + spec.sizes[2];
  if (target_total == 0) throw Error("split targets are all zero");

  // Units in order of first appearance.
  std::vector<std::string> unit_keys;
  std::vector<std::size_t> unit_tokens;
  std::vector<std::size_t> sentence_unit(corpus.size());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus.sentences()[i];
    std::string key = spec.unit == SplitUnit::kDocument ? s.doc_id : s.doc_id + "/" + s.sent_id;
    auto [it, inserted] = index.emplace(key, unit_keys.size());
    if (inserted) {
      unit_keys.push_back(key);
      unit_tokens.push_back(0);
    }
    sentence_unit[i] = it->second;
    unit_tokens[it->second] += s.size();
  }

  const auto nonzero = std::count_if(spec.sizes.begin(), spec.sizes.end(),
                                     [](std::size_t v) { return v > 0; });
  if (static_cast<std::size_t>(nonzero) > unit_keys.size())
    throw Error("corpus has " + std::to_string(unit_keys.size()) + " " +
                (spec.unit == SplitUnit::kDocument ? "documents" : "sentences") +
                ", too few for " + std::to_string(nonzero) + " non-empty splits");

  Rng rng(spec.seed);
  auto order = rng.permutation(unit_keys.size());

  // Boundaries scaled to the corpus size, compared in exact integer
  // arithmetic: a unit whose midpoint is m tokens in belongs to split k when
  // cum[k] * total <= m * target_total < cum[k + 1] * total, with doubled
  // quantities to keep the midpoint integral.
  const std::size_t total = corpus.token_count();
  std::vector<Split> assignment(unit_keys.size(), Split::kTrain);
  std::size_t position = 0;
  for (auto u : order) {
    const unsigned __int128 mid2 = 2 * position + unit_tokens[u];
    const unsigned __int128 lhs = mid2 * target_total;
    const unsigned __int128 train_end = static_cast<unsigned __int128>(2) * spec.sizes[0] * total;
    const unsigned __int128 dev_end =
        static_cast<unsigned __int128>(2) * (spec.sizes[0] + spec.sizes[1]) * total;
    if (lhs < train_end)
      assignment[u] = Split::kTrain;
    else if (lhs < dev_end)
      assignment[u] = Split::kDev;
    else
      assignment[u] = Split::kTest;
    position += unit_tokens[u];
  }

  std::array<std::vector<Sentence>, 3> parts;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    parts[static_cast<int>(assignment[sentence_unit[i]])].push_back(corpus.sentences()[i]);

  SplitResult result{Corpus(corpus.genre(), std::move(parts[0])),
                     Corpus(corpus.genre(), std::move(parts[1])),
                     Corpus(corpus.genre(), std::move(parts[2])),
                     {}};
  result.manifest.reserve(unit_keys.size());
  for (std::size_t u = 0; u < unit_keys.size(); ++u)
    result.manifest.emplace_back(unit_keys[u], assignment[u]);
  return result;
}

std::string write_manifest(const SplitResult& result) {
  std::string out;
  for (const auto& [key, split] : result.manifest) {
    out += key;
    out += '\t';
    out += split_name(split);
    out += '\n';
  }
  return out;
}

Corpus concat(const std::vector<Corpus>& corpora, std::string genre) {
  if (corpora.empty()) throw Error("concat needs at least one corpus");
  std::vector<Sentence> all;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t ci = 0; ci < corpora.size(); ++ci) {
    const auto& c = corpora[ci];
    auto collides = [&](const std::string& prefix) {
      return std::any_of(c.sentences().begin(), c.sentences().end(), [&](const Sentence& s) {
        return seen.count({prefix + s.doc_id, s.sent_id}) > 0;
      });
    };
    std::string prefix;
    if (collides(prefix)) prefix = c.genre() + ":";
    if (collides(prefix)) prefix = std::to_string(ci) + ":" + c.genre() + ":";
    for (auto s : c.sentences()) {
      s.doc_id = prefix + s.doc_id;
      seen.emplace(s.doc_id, s.sent_id);
      all.push_back(std::move(s));
    }
  }
  return Corpus(std::move(genre), std::move(all));
}

Vocabulary vocabulary(const Corpus& corpus) {
  Vocabulary v;
  for (const auto& s : corpus.sentences())
    for (const auto& t : s.tokens) v.insert(t.form);
  return v;
}

}  // namespace genrestack
