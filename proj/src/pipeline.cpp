#include "genrestack/pipeline.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <ostream>
#include <sstream>

#include "genrestack/binary_io.hpp"
#include "genrestack/ensemble.hpp"
#include "genrestack/error.hpp"
#include "genrestack/eval.hpp"
#include "genrestack/kb.hpp"
#include "genrestack/parallel.hpp"

namespace genrestack {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

void PipelineConfig::set_seed(std::uint64_t seed) {
  split.seed = seed;
  base.seed = seed;
  meta.seed = seed;
}

std::string multi_genre_without(std::string_view target) {
  return std::string(kMultiGenreModel) + "-without-" + std::string(target);
}

namespace {

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  try {
    return tree.get<T>(key, fallback);
  } catch (const pt::ptree_error& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

bool get_bool(const pt::ptree& tree, const std::string& key, bool fallback) {
  auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "1" || *v == "on") return true;
  if (*v == "false" || *v == "no" || *v == "0" || *v == "off") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: " + *v);
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    static const std::set<std::string> known = {"pipeline", "genres", "extra", "split", "base",
                                                "meta"};
    if (!known.count(section)) throw ConfigError("unknown config section [" + section + "]");
    (void)body;
  }

  PipelineConfig c;
  c.target_genre = get<std::string>(tree, "pipeline.target_genre", "");
  c.output_dir = resolve(base_dir, get<std::string>(tree, "pipeline.output_dir", "genrestack-out"));
  if (auto kb = tree.get_optional<std::string>("pipeline.kb"); kb && !kb->empty())
    c.kb_path = resolve(base_dir, *kb);
  c.use_kb = get_bool(tree, "pipeline.use_kb", true);
  c.include_target_base = get_bool(tree, "pipeline.include_target_base", false);
  c.permissive_xpos = get_bool(tree, "pipeline.permissive_xpos", false);
  c.jobs = get<int>(tree, "pipeline.jobs", 1);

  if (auto g = tree.get_child_optional("genres"))
    for (const auto& [name, v] : *g) c.genres[name] = resolve(base_dir, v.data());
  if (auto g = tree.get_child_optional("extra"))
    for (const auto& [name, v] : *g) c.extra[name] = resolve(base_dir, v.data());

  auto unit = get<std::string>(tree, "split.unit", "document");
  if (unit == "document")
    c.split.unit = SplitUnit::kDocument;
  else if (unit == "sentence")
    c.split.unit = SplitUnit::kSentence;
  else
    throw ConfigError("split.unit must be 'document' or 'sentence', got '" + unit + "'");
  c.split.sizes = {get<std::size_t>(tree, "split.train", 0), get<std::size_t>(tree, "split.dev", 0),
                   get<std::size_t>(tree, "split.test", 0)};
  c.split.seed = get<std::uint64_t>(tree, "split.seed", 1);

  c.base.epochs = get<int>(tree, "base.epochs", c.base.epochs);
  c.base.seed = get<std::uint64_t>(tree, "base.seed", c.base.seed);

  c.meta.rounds = get<int>(tree, "meta.rounds", c.meta.rounds);
  c.meta.max_depth = get<int>(tree, "meta.max_depth", c.meta.max_depth);
  c.meta.learning_rate = get<double>(tree, "meta.learning_rate", c.meta.learning_rate);
  c.meta.l2 = get<double>(tree, "meta.l2", c.meta.l2);
  c.meta.min_child_weight = get<double>(tree, "meta.min_child_weight", c.meta.min_child_weight);
  c.meta.subsample = get<double>(tree, "meta.subsample", c.meta.subsample);
  c.meta.seed = get<std::uint64_t>(tree, "meta.seed", c.meta.seed);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = binary::read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.parent_path());
}

void validate(const PipelineConfig& c) {
  if (c.target_genre.empty()) throw ConfigError("pipeline.target_genre is not set");
  if (!c.genres.count(c.target_genre))
    throw ConfigError("target genre '" + c.target_genre + "' is not listed under [genres]");
  for (const auto& [name, path] : c.extra)
    if (c.genres.count(name)) throw ConfigError("'" + name + "' is both a genre and an extra corpus");
  for (const auto* section : {&c.genres, &c.extra}) {
    for (const auto& [name, path] : *section) {
      if (name.empty() || name.find_first_of("/\\\t\n") != std::string::npos)
        throw ConfigError("invalid corpus name '" + name + "'");
      if (name == kMultiGenreModel || name == multi_genre_without(c.target_genre) ||
          name == "ensemble" || name == "majority-vote")
        throw ConfigError("corpus name '" + name + "' is reserved");
      if (!fs::is_regular_file(path))
        throw ConfigError("corpus file for '" + name + "' not found: " + path.string());
    }
  }
  if (c.kb_path && !fs::is_regular_file(*c.kb_path))
    throw ConfigError("knowledge base not found: " + c.kb_path->string());
  if (c.split.sizes[0] + c.split.sizes[1] + c.split.sizes[2] == 0)
    throw ConfigError("[split] needs train/dev/test token targets");
  if (c.split.sizes[0] == 0 || c.split.sizes[2] == 0)
    throw ConfigError("[split] train and test targets must be non-zero");
  std::size_t members = c.genres.size() - 1 + c.extra.size() + (c.include_target_base ? 1 : 0);
  if (members < 2)
    throw ConfigError("the ensemble needs at least two base models, config yields " +
                      std::to_string(members));
  if (c.base.epochs < 1) throw ConfigError("base.epochs must be at least 1");
  if (c.meta.rounds < 1 || c.meta.max_depth < 0 || !(c.meta.learning_rate > 0.0))
    throw ConfigError("invalid [meta] hyperparameters");
  if (c.jobs < 1) throw ConfigError("jobs must be at least 1");
}

namespace {

class StatusFile {
 public:
  explicit StatusFile(fs::path path) : path_(std::move(path)) {}

  void ok(std::string_view stage) {
    lines_ += std::string(stage) + "\tok\n";
    flush("running");
  }

  void failed(std::string_view stage, std::string_view message) {
    std::string one_line(message);
    for (auto& ch : one_line)
      if (ch == '\n' || ch == '\t') ch = ' ';
    lines_ += std::string(stage) + "\tfailed\t" + one_line + "\n";
    flush("failed");
  }

  void done() { flush("ok"); }

 private:
  void flush(std::string_view result) {
    try {
      binary::write_file(path_, "stage\tstatus\n" + lines_ + "result\t" + std::string(result) + "\n");
    } catch (const Error&) {
    }
  }

  fs::path path_;
  std::string lines_;
};

struct Stage {
  const char* name;
  int exit_code;
};

constexpr Stage kValidate{"validate", 2};
constexpr Stage kIngest{"ingest", 3};
constexpr Stage kSplit{"split", 4};
constexpr Stage kTrainBase{"train-base", 5};
constexpr Stage kTrainEnsemble{"train-ensemble", 6};
constexpr Stage kEvaluate{"evaluate", 7};
constexpr Stage kAblate{"ablate", 8};

std::string sizes_line(std::string_view name, std::string_view part, const Corpus& c) {
  return std::string(name) + '\t' + std::string(part) + '\t' + std::to_string(c.token_count()) +
         '\t' + std::to_string(c.size()) + '\n';
}

}  // namespace

PipelineStatus run_pipeline(const PipelineConfig& config, std::ostream& log) {
  StatusFile status(config.output_dir / "status.tsv");
  const Stage* stage = &kValidate;
  try {
    validate(config);
    fs::create_directories(config.output_dir / "models");
    fs::create_directories(config.output_dir / "splits");
    fs::create_directories(config.output_dir / "predictions");
    status.ok(stage->name);

    stage = &kIngest;
    std::map<std::string, Corpus> corpora;
    {
      std::vector<std::pair<std::string, fs::path>> files(config.genres.begin(), config.genres.end());
      files.insert(files.end(), config.extra.begin(), config.extra.end());
      std::vector<Corpus> parsed(files.size());
      parallel_for(files.size(), config.jobs, [&](std::size_t i) {
        try {
          parsed[i] = parse_conllu(binary::read_file(files[i].second), files[i].first,
                                   ParseOptions{.permissive_xpos = config.permissive_xpos});
        } catch (const Error& e) {
          throw Error(files[i].second.string() + ": " + e.what());
        }
      });
      for (std::size_t i = 0; i < files.size(); ++i) {
        log << "ingest " << files[i].first << ": " << parsed[i].token_count() << " tokens, "
            << parsed[i].size() << " sentences\n";
        corpora.emplace(files[i].first, std::move(parsed[i]));
      }
    }
    std::optional<KnowledgeBase> kb;
    if (config.kb_path && config.use_kb) {
      kb = load_kb(binary::read_file(*config.kb_path));
      log << "knowledge base: " << kb->entry_count() << " entries, " << kb->type_inventory().size()
          << " types\n";
      if (kb->skipped_multiword() > 0)
        log << "warning: skipped " << kb->skipped_multiword() << " multiword gazetteer entries\n";
    }
    const KnowledgeBase* kb_ptr = kb ? &*kb : nullptr;
    status.ok(stage->name);

    stage = &kSplit;
    const std::string& target = config.target_genre;
    auto splits = make_splits(corpora.at(target), config.split);
    binary::write_file(config.output_dir / "split_manifest.tsv", write_manifest(splits));
    for (auto part : {Split::kTrain, Split::kDev, Split::kTest}) {
      binary::write_file(
          config.output_dir / "splits" / (target + "." + std::string(split_name(part)) + ".conllu"),
          write_conllu(splits.part(part)));
      log << "split " << target << "." << split_name(part) << ": "
          << splits.part(part).token_count() << " tokens\n";
    }
    if (splits.train.empty() || splits.test.empty())
      throw Error("the target train or test split is empty");
    status.ok(stage->name);

    stage = &kTrainBase;
    // Training corpora for every single model, in name order.
    std::vector<std::pair<std::string, Corpus>> jobs;
    std::vector<Corpus> with_target, without_target;
    for (const auto& [name, corpus] : corpora) {
      if (name == target) {
        jobs.emplace_back(name, splits.train);
        with_target.push_back(splits.train);
        continue;
      }
      jobs.emplace_back(name, corpus);
      if (config.genres.count(name)) {
        with_target.push_back(corpus);
        without_target.push_back(corpus);
      }
    }
    jobs.emplace_back(std::string(kMultiGenreModel), concat(with_target, std::string(kMultiGenreModel)));
    if (!without_target.empty())
      jobs.emplace_back(multi_genre_without(target),
                        concat(without_target, multi_genre_without(target)));

    std::string sizes = "model\tpart\ttokens\tsentences\n";
    for (auto part : {Split::kTrain, Split::kDev, Split::kTest})
      sizes += sizes_line(target, split_name(part), splits.part(part));
    for (const auto& [name, corpus] : jobs)
      if (name != target) sizes += sizes_line(name, "train", corpus);
    binary::write_file(config.output_dir / "sizes.tsv", sizes);

    std::vector<std::shared_ptr<PerceptronTagger>> models(jobs.size());
    parallel_for(jobs.size(), config.jobs, [&](std::size_t i) {
      models[i] = std::make_shared<PerceptronTagger>(
          train_perceptron(jobs[i].second, config.base).renamed(jobs[i].first));
    });
    std::map<std::string, std::shared_ptr<PerceptronTagger>> by_name;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      save_model(*models[i], config.output_dir / "models" / (jobs[i].first + ".model"));
      log << "trained " << jobs[i].first << " on " << jobs[i].second.token_count() << " tokens\n";
      by_name.emplace(jobs[i].first, models[i]);
    }
    std::vector<TaggerPtr> members;
    Vocabulary member_vocab;
    for (const auto& [name, path] : corpora) {
      if (name == target && !config.include_target_base) continue;
      members.push_back(by_name.at(name));
      member_vocab.insert(by_name.at(name)->train_vocab().begin(),
                          by_name.at(name)->train_vocab().end());
    }
    status.ok(stage->name);

    stage = &kTrainEnsemble;
    for (const auto& name : leakage_warnings(members, splits.train))
      log << "warning: base model '" << name << "' was trained on the meta-training genre\n";
    auto train_table = collect_predictions(members, splits.train, config.jobs);
    auto layout = make_layout(train_table, kb_ptr, splits.train);
    auto meta = train_meta(build_instances(train_table, kb_ptr, splits.train, layout), config.meta);
    save_meta(meta, config.output_dir / "models" / "meta.model");
    log << "meta-learner: " << layout.model_names.size() << " base models, " << layout.total_len()
        << " features, " << layout.tagset.size() << " tags\n";
    status.ok(stage->name);

    stage = &kEvaluate;
    std::map<std::string, EvalResult> results;
    for (const auto& [name, model] : by_name) {
      TagSequences predicted;
      predicted.reserve(splits.test.size());
      for (const auto& s : splits.test.sentences()) predicted.push_back(model->predict(s));
      results.emplace(name, evaluate(splits.test, predicted, model->train_vocab()));
    }
    auto test_table = collect_predictions(members, splits.test, config.jobs);
    auto voted = majority_vote(test_table);
    results.emplace("majority-vote", evaluate(splits.test, voted, member_vocab));
    auto stacked = predict_meta(meta, test_table, kb_ptr, splits.test);
    auto stacked_eval = evaluate(splits.test, stacked, member_vocab);
    results.emplace("ensemble", stacked_eval);
    binary::write_file(config.output_dir / "comparison.tsv", compare_models(results));
    binary::write_file(config.output_dir / "predictions" / "ensemble.test.conllu",
                       write_conllu(splits.test, stacked));
    binary::write_file(config.output_dir / "confusions.tsv", confusions_tsv(stacked_eval));
    binary::write_file(config.output_dir / "errors.tsv", error_dump(splits.test, stacked));
    binary::write_file(config.output_dir / "error_categories.tsv",
                       histogram_tsv(categorize_errors(splits.test, stacked)));
    status.ok(stage->name);

    stage = &kAblate;
    AblationOptions options{config.meta, kb_ptr != nullptr, config.jobs};
    auto report = ablate(members, kb_ptr, splits.train, splits.test, options);
    binary::write_file(config.output_dir / "ablation.tsv", report.to_tsv());
    status.ok(stage->name);
    status.done();
    return {};
  } catch (const std::exception& e) {
    status.failed(stage->name, e.what());
    log << "error in stage " << stage->name << ": " << e.what() << '\n';
    return {stage->exit_code, stage->name, e.what()};
  }
}

}  // namespace genrestack
