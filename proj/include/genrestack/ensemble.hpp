#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genrestack/corpus.hpp"
#include "genrestack/eval.hpp"
#include "genrestack/gbdt.hpp"
#include "genrestack/kb.hpp"
#include "genrestack/tagger.hpp"

namespace genrestack {

// Column layout of the stacked features: one one-hot block per base model
// (models sorted by name, columns in tagset order), then the entity block of
// 3 x |kb_types| bits when use_kb is set. Frozen at meta-training time.
struct FeatureLayout {
  std::vector<std::string> model_names;
  TagSet tagset;
  bool use_kb = false;
  std::vector<std::string> kb_types;

  std::size_t model_block_len() const { return tagset.size(); }
  std::size_t model_offset(std::size_t model) const { return model * tagset.size(); }
  std::size_t kb_offset() const { return model_names.size() * tagset.size(); }
  std::size_t kb_block_len() const { return use_kb ? 3 * kb_types.size() : 0; }
  std::size_t total_len() const { return kb_offset() + kb_block_len(); }

  bool operator==(const FeatureLayout&) const = default;
};

struct Provenance {
  std::string doc_id;
  std::string sent_id;
  std::size_t position = 0;  // 0-based token index

  bool operator==(const Provenance&) const = default;
};

struct StackedInstance {
  std::vector<std::uint32_t> active;  // set feature columns, ascending
  std::optional<std::uint32_t> gold;  // index into layout.tagset
  Provenance provenance;

  std::vector<std::uint8_t> dense(std::size_t total_len) const;
};

struct StackedData {
  FeatureLayout layout;
  std::vector<StackedInstance> instances;
};

// Predictions of a set of base models over one corpus, ordered by model
// name. Computing this once lets several layouts share it.
struct PredictionTable {
  std::vector<std::string> names;
  std::vector<TagSet> tagsets;
  std::vector<TagSequences> predictions;

  TagSet tagset_union() const;

  PredictionTable without(std::string_view name) const;
};

// Throws on duplicate model names or on a model whose output does not
// mirror the corpus; the message names the model and sentence.
PredictionTable collect_predictions(std::span<const TaggerPtr> models, const Corpus& corpus,
                                    int jobs = 1);

// Tag set = union of the model tag sets and the corpus gold tags.
FeatureLayout make_layout(const PredictionTable& table, const KnowledgeBase* kb,
                          const Corpus& corpus);

// One instance per token in corpus order. Gold is filled when the gold tag
// is in the layout tag set. Throws LayoutMismatchError if the models, their
// predicted tags, or the KB types disagree with the layout.
StackedData build_instances(const PredictionTable& table, const KnowledgeBase* kb,
                            const Corpus& corpus, const FeatureLayout& layout);
StackedData build_instances(std::span<const TaggerPtr> models, const KnowledgeBase* kb,
                            const Corpus& corpus);

// Names of models trained on the same genre as the corpus they would
// predict for meta-training.
std::vector<std::string> leakage_warnings(std::span<const TaggerPtr> models, const Corpus& corpus);

class MetaModel {
 public:
  MetaModel(FeatureLayout layout, GbdtParams params,
            std::shared_ptr<const MetaClassifier> classifier);

  const FeatureLayout& layout() const { return layout_; }
  const GbdtParams& params() const { return params_; }
  const MetaClassifier& classifier() const { return *classifier_; }

  // Index into layout().tagset.
  std::uint32_t predict(const StackedInstance& instance) const;

 private:
  FeatureLayout layout_;
  GbdtParams params_;
  std::shared_ptr<const MetaClassifier> classifier_;
};

MetaModel train_meta(const StackedData& data, const GbdtParams& params);
// Same, with any learner behind the MetaLearner contract.
MetaModel train_meta(const StackedData& data, const MetaLearner& learner,
                     const GbdtParams& recorded_params = {});

TagSequences predict_meta(const MetaModel& meta, const PredictionTable& table,
                          const KnowledgeBase* kb, const Corpus& corpus);
TagSequences predict_meta(const MetaModel& meta, std::span<const TaggerPtr> models,
                          const KnowledgeBase* kb, const Corpus& corpus);

// Per-token modal tag; ties go to the lexicographically smallest tag.
TagSequences majority_vote(const PredictionTable& table);
TagSequences majority_vote(std::span<const TaggerPtr> models, const Corpus& corpus);

struct AblationOptions {
  GbdtParams meta;
  bool use_kb = true;
  int jobs = 1;
};

struct AblationRow {
  std::string removed;  // empty for the full ensemble
  EvalResult result;
};

struct AblationReport {
  std::vector<AblationRow> rows;  // full ensemble first, then by removed name

  // removed_model, per_token, full_sentence; the full ensemble is "none".
  std::string to_tsv() const;
};

// Retrains the meta-learner from scratch for the full model set and once per
// left-out model, evaluating each on test.
AblationReport ablate(std::span<const TaggerPtr> models, const KnowledgeBase* kb,
                      const Corpus& train, const Corpus& test, const AblationOptions& options);

inline constexpr std::string_view kMetaMagic = "GSMETAML";
inline constexpr std::uint32_t kMetaFormatVersion = 1;

std::string serialize(const MetaModel& model);
MetaModel deserialize_meta(std::string_view bytes);
void save_meta(const MetaModel& model, const std::filesystem::path& path);
MetaModel load_meta(const std::filesystem::path& path);

}  // namespace genrestack
