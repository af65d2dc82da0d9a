#include "genrestack/ensemble.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "genrestack/binary_io.hpp"
#include "genrestack/error.hpp"
#include "genrestack/parallel.hpp"

namespace genrestack {

std::vector<std::uint8_t> StackedInstance::dense(std::size_t total_len) const {
  std::vector<std::uint8_t> bits(total_len, 0);
  for (auto f : active) bits.at(f) = 1;
  return bits;
}

PredictionTable PredictionTable::without(std::string_view name) const {
  PredictionTable out;
  for (std::size_t m = 0; m < names.size(); ++m) {
    if (names[m] == name) continue;
    out.names.push_back(names[m]);
    out.tagsets.push_back(tagsets[m]);
    out.predictions.push_back(predictions[m]);
  }
  if (out.names.size() == names.size()) throw Error("no base model named '" + std::string(name) + "'");
  return out;
}

TagSet PredictionTable::tagset_union() const {
  TagSet all;
  for (const auto& t : tagsets) all = TagSet::union_of(all, t);
  return all;
}

PredictionTable collect_predictions(std::span<const TaggerPtr> models, const Corpus& corpus,
                                    int jobs) {
  if (models.empty()) throw Error("at least one base model is required");
  std::vector<std::size_t> order(models.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return models[a]->name() < models[b]->name(); });
  PredictionTable table;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& name = models[order[i]]->name();
    if (i > 0 && name == table.names.back()) throw Error("duplicate base model name '" + name + "'");
    table.names.push_back(name);
    table.tagsets.push_back(models[order[i]]->tagset());
  }
  table.predictions.resize(models.size());
  parallel_for(models.size(), jobs, [&](std::size_t i) {
    const Tagger& model = *models[order[i]];
    TagSequences out;
    out.reserve(corpus.size());
    for (const auto& s : corpus.sentences()) {
      auto tags = model.predict(s);
      if (tags.size() != s.size())
        throw Error("base model '" + model.name() + "' returned " + std::to_string(tags.size()) +
                    " tags for sentence '" + s.sent_id + "' of " + std::to_string(s.size()) +
                    " tokens");
      for (const auto& t : tags)
        if (!model.tagset().contains(t))
          throw Error("base model '" + model.name() + "' predicted tag '" + t +
                      "' outside its tag set in sentence '" + s.sent_id + "'");
      out.push_back(std::move(tags));
    }
    table.predictions[i] = std::move(out);
  });
  return table;
}

FeatureLayout make_layout(const PredictionTable& table, const KnowledgeBase* kb,
                          const Corpus& corpus) {
  FeatureLayout layout;
  layout.model_names = table.names;
  layout.tagset = TagSet::union_of(table.tagset_union(), corpus.tagset());
  layout.use_kb = kb != nullptr;
  if (kb) layout.kb_types = kb->type_inventory();
  return layout;
}

namespace {

void check_compatible(const FeatureLayout& layout, const PredictionTable& table,
                      const KnowledgeBase* kb) {
  if (table.names != layout.model_names) {
    std::string expected, got;
    for (const auto& n : layout.model_names) expected += (expected.empty() ? "" : ",") + n;
    for (const auto& n : table.names) got += (got.empty() ? "" : ",") + n;
    throw LayoutMismatchError("base models [" + got + "] do not match the layout [" + expected +
                              "]");
  }
  if (layout.use_kb && !kb)
    throw LayoutMismatchError("layout expects entity features but no knowledge base was given");
  if (!layout.use_kb && kb)
    throw LayoutMismatchError("layout has no entity block but a knowledge base was given");
  if (kb && kb->type_inventory() != layout.kb_types)
    throw LayoutMismatchError("knowledge base entity types differ from the layout");
}

}  // namespace

StackedData build_instances(const PredictionTable& table, const KnowledgeBase* kb,
                            const Corpus& corpus, const FeatureLayout& layout) {
  check_compatible(layout, table, kb);
  for (std::size_t m = 0; m < table.names.size(); ++m)
    check_shape(corpus, table.predictions[m], "base model '" + table.names[m] + "'");

  StackedData data{layout, {}};
  data.instances.reserve(corpus.token_count());
  for (std::size_t si = 0; si < corpus.size(); ++si) {
    const auto& s = corpus.sentences()[si];
    for (std::size_t i = 0; i < s.size(); ++i) {
      StackedInstance inst;
      inst.provenance = {s.doc_id, s.sent_id, i};
      inst.active.reserve(table.names.size() + 4);
      for (std::size_t m = 0; m < table.names.size(); ++m) {
        const auto& tag = table.predictions[m][si][i];
        auto idx = layout.tagset.find(tag);
        if (!idx)
          throw LayoutMismatchError("base model '" + table.names[m] + "' predicted tag '" + tag +
                                    "' which is not in the layout tag set");
        inst.active.push_back(static_cast<std::uint32_t>(layout.model_offset(m) + *idx));
      }
      if (kb) {
        const auto offset = static_cast<std::uint32_t>(layout.kb_offset());
        for (auto bit : entity_feature_indices(*kb, s.tokens[i].form))
          inst.active.push_back(offset + bit);
      }
      if (auto g = layout.tagset.find(s.tokens[i].tag)) inst.gold = static_cast<std::uint32_t>(*g);
      data.instances.push_back(std::move(inst));
    }
  }
  return data;
}

StackedData build_instances(std::span<const TaggerPtr> models, const KnowledgeBase* kb,
                            const Corpus& corpus) {
  auto table = collect_predictions(models, corpus);
  return build_instances(table, kb, corpus, make_layout(table, kb, corpus));
}

std::vector<std::string> leakage_warnings(std::span<const TaggerPtr> models, const Corpus& corpus) {
  std::vector<std::string> out;
  for (const auto& m : models)
    if (m->training_genre() == corpus.genre()) out.push_back(m->name());
  std::sort(out.begin(), out.end());
  return out;
}

MetaModel::MetaModel(FeatureLayout layout, GbdtParams params,
                     std::shared_ptr<const MetaClassifier> classifier)
    : layout_(std::move(layout)), params_(params), classifier_(std::move(classifier)) {
  if (!classifier_) throw Error("meta model without a classifier");
  if (classifier_->class_count() != layout_.tagset.size())
    throw LayoutMismatchError("classifier class count differs from the layout tag set");
}

std::uint32_t MetaModel::predict(const StackedInstance& instance) const {
  return classifier_->predict(instance.active);
}

namespace {

void check_instances(const StackedData& data) {
  const auto& layout = data.layout;
  const std::size_t models = layout.model_names.size();
  for (const auto& inst : data.instances) {
    std::size_t m = 0;
    for (auto f : inst.active) {
      if (f >= layout.total_len())
        throw LayoutMismatchError("instance feature " + std::to_string(f) +
                                  " is outside the layout");
      if (m < models) {
        if (f < layout.model_offset(m) || f >= layout.model_offset(m + 1))
          throw LayoutMismatchError("instance at " + inst.provenance.sent_id + ":" +
                                    std::to_string(inst.provenance.position) +
                                    " does not have exactly one bit per model block");
        ++m;
      } else if (f < layout.kb_offset()) {
        throw LayoutMismatchError("instance has more than one bit in a model block");
      }
    }
    if (m != models) throw LayoutMismatchError("instance is missing a model block bit");
    if (!std::is_sorted(inst.active.begin(), inst.active.end()))
      throw LayoutMismatchError("instance features are not ascending");
  }
}

}  // namespace

MetaModel train_meta(const StackedData& data, const MetaLearner& learner,
                     const GbdtParams& recorded_params) {
  if (data.instances.empty()) throw Error("no stacked instances to train on");
  check_instances(data);
  TrainingSet ts;
  ts.feature_count = data.layout.total_len();
  ts.class_count = data.layout.tagset.size();
  ts.rows.reserve(data.instances.size());
  ts.labels.reserve(data.instances.size());
  for (const auto& inst : data.instances) {
    if (!inst.gold)
      throw Error("training instance " + inst.provenance.sent_id + ":" +
                  std::to_string(inst.provenance.position) + " has no gold tag in the layout");
    ts.rows.push_back(inst.active);
    ts.labels.push_back(*inst.gold);
  }
  std::shared_ptr<const MetaClassifier> classifier = learner.fit(ts);
  return MetaModel(data.layout, recorded_params, std::move(classifier));
}

MetaModel train_meta(const StackedData& data, const GbdtParams& params) {
  return train_meta(data, GbdtLearner(params), params);
}

TagSequences predict_meta(const MetaModel& meta, const PredictionTable& table,
                          const KnowledgeBase* kb, const Corpus& corpus) {
  auto data = build_instances(table, kb, corpus, meta.layout());
  TagSequences out;
  out.reserve(corpus.size());
  std::size_t next = 0;
  for (const auto& s : corpus.sentences()) {
    TagSequence tags;
    tags.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      tags.push_back(meta.layout().tagset.at(meta.predict(data.instances[next++])));
    out.push_back(std::move(tags));
  }
  return out;
}

TagSequences predict_meta(const MetaModel& meta, std::span<const TaggerPtr> models,
                          const KnowledgeBase* kb, const Corpus& corpus) {
  return predict_meta(meta, collect_predictions(models, corpus), kb, corpus);
}

TagSequences majority_vote(const PredictionTable& table) {
  if (table.predictions.empty()) throw Error("majority vote needs at least one model");
  const auto& first = table.predictions.front();
  TagSequences out(first.size());
  std::map<std::string_view, std::size_t> counts;
  for (std::size_t si = 0; si < first.size(); ++si) {
    out[si].reserve(first[si].size());
    for (std::size_t i = 0; i < first[si].size(); ++i) {
      counts.clear();
      for (const auto& p : table.predictions) ++counts[p[si][i]];
      // std::map iterates in lexicographic order, so the first maximum wins ties.
      auto best = counts.begin();
      for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
      out[si].emplace_back(best->first);
    }
  }
  return out;
}

TagSequences majority_vote(std::span<const TaggerPtr> models, const Corpus& corpus) {
  return majority_vote(collect_predictions(models, corpus));
}

std::string AblationReport::to_tsv() const {
  std::ostringstream os;
  os << "removed_model\tper_token\tfull_sentence\n";
  for (const auto& row : rows)
    os << (row.removed.empty() ? "none" : row.removed) << '\t' << format_percent(row.result.tokens)
       << '\t' << format_percent(row.result.sentences) << '\n';
  return os.str();
}

AblationReport ablate(std::span<const TaggerPtr> models, const KnowledgeBase* kb,
                      const Corpus& train, const Corpus& test, const AblationOptions& options) {
  if (models.size() < 2) throw Error("ablation needs at least two base models");
  const KnowledgeBase* row_kb = options.use_kb ? kb : nullptr;
  const auto train_table = collect_predictions(models, train, options.jobs);
  const auto test_table = collect_predictions(models, test, options.jobs);

  AblationReport report;
  report.rows.resize(train_table.names.size() + 1);
  parallel_for(report.rows.size(), options.jobs, [&](std::size_t r) {
    std::string removed = r == 0 ? std::string() : train_table.names[r - 1];
    auto tr = removed.empty() ? train_table : train_table.without(removed);
    auto te = removed.empty() ? test_table : test_table.without(removed);
    auto layout = make_layout(tr, row_kb, train);
    auto meta = train_meta(build_instances(tr, row_kb, train, layout), options.meta);
    auto predicted = predict_meta(meta, te, row_kb, test);
    report.rows[r] = {std::move(removed), evaluate(test, predicted, Vocabulary{})};
  });
  return report;
}

std::string serialize(const MetaModel& model) {
  binary::Writer w;
  w.raw(kMetaMagic);
  w.u32(kMetaFormatVersion);
  const auto& layout = model.layout();
  w.u32(static_cast<std::uint32_t>(layout.model_names.size()));
  for (const auto& n : layout.model_names) w.str(n);
  w.u32(static_cast<std::uint32_t>(layout.tagset.size()));
  for (const auto& t : layout.tagset.tags()) w.str(t);
  w.u8(layout.use_kb ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(layout.kb_types.size()));
  for (const auto& t : layout.kb_types) w.str(t);
  const auto& p = model.params();
  w.u32(static_cast<std::uint32_t>(p.rounds));
  w.u32(static_cast<std::uint32_t>(p.max_depth));
  w.f64(p.learning_rate);
  w.f64(p.l2);
  w.f64(p.min_child_weight);
  w.f64(p.subsample);
  w.u64(p.seed);
  w.str(model.classifier().kind());
  model.classifier().write(w);
  return w.bytes();
}

MetaModel deserialize_meta(std::string_view bytes) {
  binary::Reader r(bytes);
  binary::read_header(r, kMetaMagic, kMetaFormatVersion);
  FeatureLayout layout;
  for (auto n = r.count(4); n > 0; --n) layout.model_names.push_back(r.str());
  std::vector<std::string> tags(r.count(4));
  for (auto& t : tags) t = r.str();
  layout.tagset = TagSet(tags);
  if (layout.tagset.tags() != tags)
    throw CorruptFileError("corrupt model file: tag set is not sorted and unique");
  layout.use_kb = r.u8() != 0;
  for (auto n = r.count(4); n > 0; --n) layout.kb_types.push_back(r.str());
  GbdtParams p;
  p.rounds = static_cast<int>(r.u32());
  p.max_depth = static_cast<int>(r.u32());
  p.learning_rate = r.f64();
  p.l2 = r.f64();
  p.min_child_weight = r.f64();
  p.subsample = r.f64();
  p.seed = r.u64();
  auto kind = r.str();
  if (kind != "gbdt") throw FormatError("unknown meta-learner kind '" + kind + "'");
  auto classifier = GbdtClassifier::read(r);
  r.expect_end();
  if (classifier->feature_count() != layout.total_len())
    throw CorruptFileError("corrupt model file: classifier width differs from the layout");
  return MetaModel(std::move(layout), p, std::move(classifier));
}

void save_meta(const MetaModel& model, const std::filesystem::path& path) {
  binary::write_file(path, serialize(model));
}

MetaModel load_meta(const std::filesystem::path& path) {
  return deserialize_meta(binary::read_file(path));
}

}  // namespace genrestack
