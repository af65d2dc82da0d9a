#include "genrestack/perceptron.hpp"

#include <algorithm>

#include "genrestack/binary_io.hpp"
#include "genrestack/error.hpp"
#include "genrestack/random.hpp"
#include "genrestack/text.hpp"

namespace genrestack {

FeatureSet extract_features(const Sentence& sentence, std::size_t index,
                            std::span<const std::string> history) {
  if (index >= sentence.size())
    throw Error("feature index " + std::to_string(index) + " out of range for sentence of " +
                std::to_string(sentence.size()) + " tokens");
  if (history.size() < index)
    throw Error("tag history shorter than the token index");

  const std::string& form = sentence.tokens[index].form;
  const std::size_t len = text::length(form);
  auto tag_at = [&](std::size_t back) -> std::string_view {
    return index >= back ? std::string_view(history[index - back]) : kStartMarker;
  };
  auto word_at = [&](std::ptrdiff_t offset) -> std::string_view {
    auto pos = static_cast<std::ptrdiff_t>(index) + offset;
    if (pos < 0) return kStartMarker;
    if (pos >= static_cast<std::ptrdiff_t>(sentence.size())) return kEndMarker;
    return sentence.tokens[static_cast<std::size_t>(pos)].form;
  };

  FeatureSet f;
  f.reserve(20);
  const std::string lower = text::to_lower(form);
  f.emplace_back("bias=1");
  f.push_back("word=" + form);
  f.push_back("lower=" + lower);
  f.push_back("shape=" + word_shape(form));
  f.push_back("class=" + word_class(form));
  for (std::size_t n = 1; n <= std::min<std::size_t>(4, len); ++n)
    f.push_back("pre" + std::to_string(n) + "=" + text::prefix(form, n));
  for (std::size_t n = 1; n <= std::min<std::size_t>(4, len); ++n)
    f.push_back("suf" + std::to_string(n) + "=" + text::suffix(lower, n));
  if (has_elongation(form)) f.emplace_back("elong=yes");
  f.push_back("prevword=" + std::string(word_at(-1)));
  f.push_back("nextword=" + std::string(word_at(1)));
  f.push_back("prevtag=" + std::string(tag_at(1)));
  f.push_back("prev2tags=" + std::string(tag_at(2)) + "|" + std::string(tag_at(1)));
  f.push_back("prevtag+word=" + std::string(tag_at(1)) + "|" + lower);
  return f;
}

PerceptronTagger::PerceptronTagger(std::string genre, TagSet tagset, Vocabulary train_vocab,
                                   WeightTable weights, PerceptronParams params)
    : genre_(std::move(genre)),
      tagset_(std::move(tagset)),
      train_vocab_(std::move(train_vocab)),
      weights_(std::move(weights)),
      params_(params) {
  if (tagset_.empty()) throw Error("tagger '" + genre_ + "' has an empty tag set");
  for (const auto& [key, entries] : weights_)
    for (const auto& e : entries)
      if (e.tag >= tagset_.size())
        throw FormatError("weight for feature '" + key + "' names tag index " +
                          std::to_string(e.tag) + " outside the tag set");
}

namespace {

std::size_t argmax(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

}  // namespace

TagSequence PerceptronTagger::predict(const Sentence& sentence) const {
  TagSequence tags;
  tags.reserve(sentence.size());
  std::vector<double> scores(tagset_.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    std::fill(scores.begin(), scores.end(), 0.0);
    for (const auto& key : extract_features(sentence, i, tags)) {
      auto it = weights_.find(key);
      if (it == weights_.end()) continue;
      for (const auto& e : it->second) scores[e.tag] += e.weight;
    }
    tags.push_back(tagset_.at(argmax(scores)));
  }
  return tags;
}

PerceptronTagger PerceptronTagger::renamed(std::string name) const {
  PerceptronTagger copy = *this;
  copy.genre_ = std::move(name);
  return copy;
}

std::vector<std::size_t> epoch_order(std::size_t sentence_count, std::uint64_t seed, int epoch) {
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(epoch)));
  return rng.permutation(sentence_count);
}

namespace {

// Lazily averaged weight: total accumulates weight x steps held.
struct AveragedWeight {
  std::uint32_t tag;
  double weight = 0.0;
  double total = 0.0;
  std::uint64_t stamp = 0;
};

class Trainer {
 public:
  explicit Trainer(std::size_t tag_count) : scores_(tag_count) {}

  std::size_t guess(const FeatureSet& features) {
    std::fill(scores_.begin(), scores_.end(), 0.0);
    for (const auto& key : features) {
      auto it = table_.find(key);
      if (it == table_.end()) continue;
      for (const auto& w : it->second) scores_[w.tag] += w.weight;
    }
    return argmax(scores_);
  }

  void update(const FeatureSet& features, std::uint32_t truth, std::uint32_t guess,
              std::uint64_t step) {
    for (const auto& key : features) {
      auto& entries = table_[key];
      bump(entries, truth, 1.0, step);
      bump(entries, guess, -1.0, step);
    }
  }

  WeightTable averaged(std::uint64_t steps) const {
    WeightTable out;
    for (const auto& [key, entries] : table_) {
      std::vector<ClassWeight> kept;
      for (const auto& e : entries) {
        double total = e.total + static_cast<double>(steps - e.stamp) * e.weight;
        double avg = total / static_cast<double>(steps);
        if (avg != 0.0) kept.push_back({e.tag, avg});
      }
      if (kept.empty()) continue;
      std::sort(kept.begin(), kept.end(),
                [](const ClassWeight& a, const ClassWeight& b) { return a.tag < b.tag; });
      out.emplace(key, std::move(kept));
    }
    return out;
  }

 private:
  static void bump(std::vector<AveragedWeight>& entries, std::uint32_t tag, double delta,
                   std::uint64_t step) {
    auto it = std::find_if(entries.begin(), entries.end(),
                           [&](const AveragedWeight& w) { return w.tag == tag; });
    if (it == entries.end()) {
      entries.push_back({tag, 0.0, 0.0, step});
      it = entries.end() - 1;
    }
    it->total += static_cast<double>(step - it->stamp) * it->weight;
    it->stamp = step;
    it->weight += delta;
  }

  std::unordered_map<std::string, std::vector<AveragedWeight>> table_;
  std::vector<double> scores_;
};

}  // namespace

PerceptronTagger train_perceptron(const Corpus& corpus, const PerceptronParams& params) {
  if (corpus.empty()) throw Error("cannot train a tagger on an empty corpus");
  if (params.epochs < 1) throw Error("epochs must be at least 1");

  const TagSet& tagset = corpus.tagset();
  Trainer trainer(tagset.size());
  std::uint64_t step = 0;
  std::vector<std::string> history;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (auto si : epoch_order(corpus.size(), params.seed, epoch)) {
      const auto& sentence = corpus.sentences()[si];
      history.clear();
      for (std::size_t i = 0; i < sentence.size(); ++i) {
        auto features = extract_features(sentence, i, history);
        auto truth = static_cast<std::uint32_t>(tagset.index_of(sentence.tokens[i].tag));
        auto guess = static_cast<std::uint32_t>(trainer.guess(features));
        if (guess != truth) trainer.update(features, truth, guess, step);
        history.push_back(tagset.at(guess));
        ++step;
      }
    }
  }
  return PerceptronTagger(corpus.genre(), tagset, vocabulary(corpus), trainer.averaged(step),
                          params);
}

std::string serialize(const PerceptronTagger& model) {
  binary::Writer w;
  w.raw(kTaggerMagic);
  w.u32(kTaggerFormatVersion);
  w.str(model.name());
  w.u32(static_cast<std::uint32_t>(model.params().epochs));
  w.u64(model.params().seed);
  w.u32(static_cast<std::uint32_t>(model.tagset().size()));
  for (const auto& t : model.tagset().tags()) w.str(t);
  w.u32(static_cast<std::uint32_t>(model.train_vocab().size()));
  for (const auto& form : model.train_vocab()) w.str(form);

  std::vector<const WeightTable::value_type*> rows;
  rows.reserve(model.weights().size());
  for (const auto& row : model.weights()) rows.push_back(&row);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
  w.u32(static_cast<std::uint32_t>(rows.size()));
  for (const auto* row : rows) {
    w.str(row->first);
    w.u32(static_cast<std::uint32_t>(row->second.size()));
    for (const auto& e : row->second) {
      w.u32(e.tag);
      w.f64(e.weight);
    }
  }
  return w.bytes();
}

PerceptronTagger deserialize_tagger(std::string_view bytes) {
  binary::Reader r(bytes);
  binary::read_header(r, kTaggerMagic, kTaggerFormatVersion);
  std::string genre = r.str();
  PerceptronParams params;
  params.epochs = static_cast<int>(r.u32());
  params.seed = r.u64();

  std::vector<std::string> tags(r.count(4));
  for (auto& t : tags) t = r.str();
  TagSet tagset(tags);
  if (tagset.size() != tags.size() || tagset.tags() != tags)
    throw CorruptFileError("corrupt model file: tag set is not sorted and unique");

  Vocabulary vocab;
  for (auto n = r.count(4); n > 0; --n) vocab.insert(r.str());

  WeightTable weights;
  for (auto n = r.count(8); n > 0; --n) {
    std::string key = r.str();
    std::vector<ClassWeight> entries(r.count(12));
    for (auto& e : entries) {
      e.tag = r.u32();
      e.weight = r.f64();
    }
    weights.emplace(std::move(key), std::move(entries));
  }
  r.expect_end();
  return PerceptronTagger(std::move(genre), std::move(tagset), std::move(vocab),
                          std::move(weights), params);
}

void save_model(const PerceptronTagger& model, const std::filesystem::path& path) {
  binary::write_file(path, serialize(model));
}

PerceptronTagger load_model(const std::filesystem::path& path) {
  return deserialize_tagger(binary::read_file(path));
}

}  // namespace genrestack
