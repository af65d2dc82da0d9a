#pragma once

#include <memory>
#include <string>

#include "genrestack/corpus.hpp"

namespace genrestack {

// The contract every base model meets, whether trained here or wrapping an
// external tagger: one tag per token, each drawn from tagset().
class Tagger {
 public:
  virtual ~Tagger() = default;

  virtual const std::string& name() const = 0;
  virtual const TagSet& tagset() const = 0;
  virtual TagSequence predict(const Sentence& sentence) const = 0;

  // Genre of the data the model was trained on; used to flag overlap with a
  // meta-training corpus.
  virtual const std::string& training_genre() const { return name(); }
};

using TaggerPtr = std::shared_ptr<const Tagger>;

}  // namespace genrestack
