#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "genrestack/corpus.hpp"
#include "genrestack/surface.hpp"
#include "genrestack/tagger.hpp"

namespace genrestack {

// Feature keys for one token position, in template order. Every key is
// "<template>=<value>".
using FeatureSet = std::vector<std::string>;

inline constexpr std::string_view kStartMarker = "<S>";
inline constexpr std::string_view kEndMarker = "</S>";

// history holds the predicted tags of positions [0, index); positions before
// the sentence read as kStartMarker. Throws when index is out of range.
FeatureSet extract_features(const Sentence& sentence, std::size_t index,
                            std::span<const std::string> history);

struct PerceptronParams {
  int epochs = 10;
  std::uint64_t seed = 1;
};

struct ClassWeight {
  std::uint32_t tag = 0;
  double weight = 0.0;

  bool operator==(const ClassWeight&) const = default;
};

using WeightTable = std::unordered_map<std::string, std::vector<ClassWeight>>;

class PerceptronTagger final : public Tagger {
 public:
  PerceptronTagger(std::string genre, TagSet tagset, Vocabulary train_vocab, WeightTable weights,
                   PerceptronParams params);

  const std::string& name() const override { return genre_; }
  const TagSet& tagset() const override { return tagset_; }
  // Greedy left to right; ties go to the lexicographically smallest tag.
  TagSequence predict(const Sentence& sentence) const override;

  const Vocabulary& train_vocab() const { return train_vocab_; }
  const WeightTable& weights() const { return weights_; }
  const PerceptronParams& params() const { return params_; }

  // Returns a copy under a new name, e.g. when one genre's model is reused.
  PerceptronTagger renamed(std::string name) const;

 private:
  std::string genre_;
  TagSet tagset_;
  Vocabulary train_vocab_;
  WeightTable weights_;
  PerceptronParams params_;
};

// Sentence visiting order for one training epoch.
std::vector<std::size_t> epoch_order(std::size_t sentence_count, std::uint64_t seed, int epoch);

// Averaged perceptron: greedy decoding with the current weights, a +1/-1
// update on every wrong tag, and final weights averaged over every token
// step of every epoch.
PerceptronTagger train_perceptron(const Corpus& corpus, const PerceptronParams& params);

inline constexpr std::string_view kTaggerMagic = "GSTAGGER";
inline constexpr std::uint32_t kTaggerFormatVersion = 1;

std::string serialize(const PerceptronTagger& model);
PerceptronTagger deserialize_tagger(std::string_view bytes);
void save_model(const PerceptronTagger& model, const std::filesystem::path& path);
PerceptronTagger load_model(const std::filesystem::path& path);

}  // namespace genrestack
