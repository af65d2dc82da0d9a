// genrestack: genre-partitioned POS tagging with a stacked meta-learner.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include "genrestack/binary_io.hpp"
#include "genrestack/corpus.hpp"
#include "genrestack/ensemble.hpp"
#include "genrestack/error.hpp"
#include "genrestack/eval.hpp"
#include "genrestack/kb.hpp"
#include "genrestack/perceptron.hpp"
#include "genrestack/pipeline.hpp"

namespace fs = std::filesystem;
using namespace genrestack;

namespace {

constexpr const char* kOutputDirEnv = "GENRESTACK_OUTPUT_DIR";

Corpus read_corpus(const fs::path& path, bool permissive, std::string genre = {}) {
  if (genre.empty()) genre = path.stem().string();
  try {
    return parse_conllu(binary::read_file(path), genre, ParseOptions{.permissive_xpos = permissive});
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<TaggerPtr> load_taggers(const std::vector<fs::path>& paths) {
  std::vector<TaggerPtr> out;
  for (const auto& p : paths) out.push_back(std::make_shared<PerceptronTagger>(load_model(p)));
  return out;
}

std::optional<KnowledgeBase> read_kb(const std::string& path, bool no_kb) {
  if (path.empty() || no_kb) return std::nullopt;
  auto kb = load_kb(binary::read_file(path));
  if (kb.skipped_multiword() > 0)
    std::cerr << "warning: skipped " << kb.skipped_multiword() << " multiword gazetteer entries\n";
  return kb;
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content;
  else
    binary::write_file(path, content);
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw Error("expected NAME=PATH, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

// A training vocabulary from a tagger model file or a CoNLL-U corpus.
Vocabulary vocab_from(const fs::path& path) {
  auto bytes = binary::read_file(path);
  if (bytes.rfind(kTaggerMagic, 0) == 0) return deserialize_tagger(bytes).train_vocab();
  return vocabulary(parse_conllu(bytes, "vocab", ParseOptions{.permissive_xpos = true}));
}

void add_meta_options(CLI::App* cmd, GbdtParams& p) {
  cmd->add_option("--rounds", p.rounds, "Boosting rounds")->capture_default_str();
  cmd->add_option("--max-depth", p.max_depth, "Tree depth limit")->capture_default_str();
  cmd->add_option("--learning-rate", p.learning_rate, "Shrinkage")->capture_default_str();
  cmd->add_option("--subsample", p.subsample, "Row fraction per round")->capture_default_str();
  cmd->add_option("--seed", p.seed, "Seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Genre-aware POS tagging with stacked base taggers"};
  app.require_subcommand(1);

  // run
  std::string config_path, output_dir;
  std::optional<std::uint64_t> run_seed;
  std::optional<int> run_jobs;
  bool run_no_kb = false, run_include_target = false;
  auto* run = app.add_subcommand("run", "Run the full pipeline from a config file");
  run->add_option("--config", config_path, "Pipeline INI file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_seed, "Override every seed");
  run->add_flag("--no-kb", run_no_kb, "Disable entity features");
  run->add_flag("--include-target-base", run_include_target,
                "Add the target-genre model to the ensemble");
  run->add_option("--output-dir", output_dir, "Artifact directory (default: $GENRESTACK_OUTPUT_DIR or config)");
  run->add_option("--jobs", run_jobs, "Worker threads");

  // split
  std::string split_input, split_genre, split_unit = "document", split_out = ".";
  std::array<std::size_t, 3> split_sizes{};
  std::uint64_t split_seed = 1;
  bool permissive = false;
  auto* split = app.add_subcommand("split", "Split a corpus into train/dev/test");
  split->add_option("--input", split_input, "CoNLL-U file")->required()->check(CLI::ExistingFile);
  split->add_option("--genre", split_genre, "Genre label (default: file stem)");
  split->add_option("--train", split_sizes[0], "Target train tokens")->required();
  split->add_option("--dev", split_sizes[1], "Target dev tokens")->required();
  split->add_option("--test", split_sizes[2], "Target test tokens")->required();
  split->add_option("--unit", split_unit, "document or sentence")
      ->check(CLI::IsMember({"document", "sentence"}))
      ->capture_default_str();
  split->add_option("--seed", split_seed, "Assignment seed")->capture_default_str();
  split->add_option("--output-dir", split_out, "Where to write splits and manifest");
  split->add_flag("--permissive", permissive, "Accept '_' XPOS as X-UNK");

  // train-base
  std::vector<fs::path> tb_inputs;
  std::string tb_name, tb_out;
  PerceptronParams tb_params;
  auto* train_base = app.add_subcommand("train-base", "Train one base tagger");
  train_base->add_option("--input", tb_inputs, "CoNLL-U file(s), concatenated")
      ->required()
      ->check(CLI::ExistingFile);
  train_base->add_option("--name", tb_name, "Model name (default: first file stem)");
  train_base->add_option("--epochs", tb_params.epochs, "Training epochs")->capture_default_str();
  train_base->add_option("--seed", tb_params.seed, "Shuffle seed")->capture_default_str();
  train_base->add_option("--out", tb_out, "Model file")->required();
  train_base->add_flag("--permissive", permissive, "Accept '_' XPOS as X-UNK");

  // predict
  std::vector<fs::path> pr_models;
  std::string pr_input, pr_out, pr_meta, pr_kb, pr_external;
  bool pr_vote = false, pr_no_kb = false;
  auto* predict = app.add_subcommand(
      "predict", "Tag a corpus; predictions go to MISC as PredXPOS=<tag>");
  predict->add_option("--model", pr_models, "Base model file(s)")->check(CLI::ExistingFile);
  predict->add_option("--meta", pr_meta, "Meta model (stacked prediction over --model files)")
      ->check(CLI::ExistingFile);
  predict->add_flag("--vote", pr_vote, "Majority vote over --model files");
  predict->add_option("--kb", pr_kb, "Gazetteer TSV")->check(CLI::ExistingFile);
  predict->add_flag("--no-kb", pr_no_kb, "Ignore --kb");
  predict->add_option("--external", pr_external,
                      "CoNLL-U output of another tagger; its XPOS column becomes PredXPOS")
      ->check(CLI::ExistingFile);
  predict->add_option("--input", pr_input, "Gold CoNLL-U")->required()->check(CLI::ExistingFile);
  predict->add_option("--out", pr_out, "Output CoNLL-U (default: stdout)");
  predict->add_flag("--permissive", permissive, "Accept '_' XPOS as X-UNK");

  // train-ensemble
  std::vector<fs::path> te_models;
  std::string te_input, te_out, te_kb;
  bool te_no_kb = false;
  GbdtParams te_params;
  auto* train_ens = app.add_subcommand("train-ensemble", "Train the stacked meta-learner");
  train_ens->add_option("--model", te_models, "Base model files")->required()->check(CLI::ExistingFile);
  train_ens->add_option("--input", te_input, "Meta-training CoNLL-U")->required()->check(CLI::ExistingFile);
  train_ens->add_option("--kb", te_kb, "Gazetteer TSV")->check(CLI::ExistingFile);
  train_ens->add_flag("--no-kb", te_no_kb, "Ignore --kb");
  train_ens->add_option("--out", te_out, "Meta model file")->required();
  train_ens->add_flag("--permissive", permissive, "Accept '_' XPOS as X-UNK");
  add_meta_options(train_ens, te_params);

  // evaluate
  std::string ev_gold, ev_out, ev_errors, ev_categories, ev_confusions;
  std::vector<std::string> ev_preds, ev_vocabs;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against gold");
  evaluate_cmd->add_option("--gold", ev_gold, "Gold CoNLL-U")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--pred", ev_preds, "NAME=CoNLL-U with PredXPOS (repeatable)")->required();
  evaluate_cmd->add_option("--vocab", ev_vocabs,
                           "NAME=model file or training CoNLL-U; repeats for one NAME are unioned");
  evaluate_cmd->add_option("--out", ev_out, "Comparison TSV (default: stdout)");
  evaluate_cmd->add_option("--errors", ev_errors, "Per-token error dump (single --pred only)");
  evaluate_cmd->add_option("--categories", ev_categories, "Error category histogram (single --pred only)");
  evaluate_cmd->add_option("--confusions", ev_confusions, "Confusion pairs (single --pred only)");
  evaluate_cmd->add_flag("--permissive", permissive, "Accept '_' XPOS as X-UNK");

  // ablate
  std::vector<fs::path> ab_models;
  std::string ab_train, ab_test, ab_kb, ab_out;
  bool ab_no_kb = false;
  int ab_jobs = 1;
  GbdtParams ab_params;
  auto* ablate_cmd = app.add_subcommand("ablate", "Leave-one-model-out ablation");
  ablate_cmd->add_option("--model", ab_models, "Base model files")->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--train", ab_train, "Meta-training CoNLL-U")->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--test", ab_test, "Evaluation CoNLL-U")->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--kb", ab_kb, "Gazetteer TSV")->check(CLI::ExistingFile);
  ablate_cmd->add_flag("--no-kb", ab_no_kb, "Ignore --kb");
  ablate_cmd->add_option("--jobs", ab_jobs, "Worker threads")->capture_default_str();
  ablate_cmd->add_option("--out", ab_out, "Ablation TSV (default: stdout)");
  ablate_cmd->add_flag("--permissive", permissive, "Accept '_' XPOS as X-UNK");
  add_meta_options(ablate_cmd, ab_params);

  // kb stats
  std::string kb_path;
  auto* kb_cmd = app.add_subcommand("kb", "Gazetteer utilities");
  kb_cmd->require_subcommand(1);
  auto* kb_stats = kb_cmd->add_subcommand("stats", "Entry and type counts");
  kb_stats->add_option("--kb", kb_path, "Gazetteer TSV")->required()->check(CLI::ExistingFile);

  // report
  std::string report_dir;
  auto* report = app.add_subcommand("report", "Print the reports of a pipeline run");
  report->add_option("--output-dir", report_dir, "Pipeline output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto config = load_config(config_path);
      if (run_seed) config.set_seed(*run_seed);
      if (run_no_kb) config.use_kb = false;
      if (run_include_target) config.include_target_base = true;
      if (run_jobs) config.jobs = *run_jobs;
      if (!output_dir.empty())
        config.output_dir = output_dir;
      else if (const char* env = std::getenv(kOutputDirEnv); env && *env)
        config.output_dir = env;
      auto status = run_pipeline(config, std::cerr);
      return status.exit_code;
    }

    if (split->parsed()) {
      auto corpus = read_corpus(split_input, permissive, split_genre);
      SplitSpec spec{split_unit == "sentence" ? SplitUnit::kSentence : SplitUnit::kDocument,
                     split_sizes, split_seed};
      auto result = make_splits(corpus, spec);
      fs::path dir(split_out);
      binary::write_file(dir / "split_manifest.tsv", write_manifest(result));
      for (auto part : {Split::kTrain, Split::kDev, Split::kTest}) {
        const auto& c = result.part(part);
        binary::write_file(dir / (corpus.genre() + "." + std::string(split_name(part)) + ".conllu"),
                           write_conllu(c));
        std::cerr << corpus.genre() << '.' << split_name(part) << '\t' << c.token_count()
                  << " tokens\t" << c.size() << " sentences\n";
      }
      return 0;
    }

    if (train_base->parsed()) {
      std::vector<Corpus> parts;
      for (const auto& p : tb_inputs) parts.push_back(read_corpus(p, permissive));
      std::string name = tb_name.empty() ? tb_inputs.front().stem().string() : tb_name;
      auto corpus = parts.size() == 1 ? Corpus(name, parts.front().sentences()) : concat(parts, name);
      auto model = train_perceptron(corpus, tb_params);
      save_model(model, tb_out);
      std::cerr << "trained " << name << " on " << corpus.token_count() << " tokens\n";
      return 0;
    }

    if (predict->parsed()) {
      auto gold = read_corpus(pr_input, permissive);
      TagSequences tags;
      if (!pr_external.empty()) {
        tags = read_predictions(binary::read_file(pr_external), gold, PredictionSource::kXpos);
      } else {
        if (pr_models.empty()) throw Error("predict needs --model or --external");
        auto models = load_taggers(pr_models);
        if (!pr_meta.empty()) {
          auto meta = load_meta(pr_meta);
          auto kb = read_kb(pr_kb, pr_no_kb);
          tags = predict_meta(meta, models, kb ? &*kb : nullptr, gold);
        } else if (pr_vote || models.size() > 1) {
          tags = majority_vote(models, gold);
        } else {
          for (const auto& s : gold.sentences()) tags.push_back(models.front()->predict(s));
        }
      }
      write_or_print(pr_out, write_conllu(gold, tags));
      return 0;
    }

    if (train_ens->parsed()) {
      auto corpus = read_corpus(te_input, permissive);
      auto models = load_taggers(te_models);
      auto kb = read_kb(te_kb, te_no_kb);
      for (const auto& name : leakage_warnings(models, corpus))
        std::cerr << "warning: base model '" << name << "' was trained on the meta-training genre\n";
      auto meta = train_meta(build_instances(models, kb ? &*kb : nullptr, corpus), te_params);
      save_meta(meta, te_out);
      return 0;
    }

    if (evaluate_cmd->parsed()) {
      auto gold = read_corpus(ev_gold, permissive);
      std::map<std::string, Vocabulary> vocabs;
      for (const auto& v : ev_vocabs) {
        auto [name, path] = split_assignment(v);
        auto words = vocab_from(path);
        vocabs[name].insert(words.begin(), words.end());
      }
      std::map<std::string, EvalResult> results;
      std::optional<TagSequences> single;
      for (const auto& p : ev_preds) {
        auto [name, path] = split_assignment(p);
        auto tags = read_predictions(binary::read_file(path), gold, PredictionSource::kMisc);
        results[name] = evaluate(gold, tags, vocabs[name]);
        single = std::move(tags);
      }
      bool want_details = !ev_errors.empty() || !ev_categories.empty() || !ev_confusions.empty();
      if (want_details && ev_preds.size() != 1)
        throw Error("--errors, --categories and --confusions need exactly one --pred");
      if (!ev_errors.empty()) binary::write_file(ev_errors, error_dump(gold, *single));
      if (!ev_categories.empty())
        binary::write_file(ev_categories, histogram_tsv(categorize_errors(gold, *single)));
      if (!ev_confusions.empty())
        binary::write_file(ev_confusions, confusions_tsv(results.begin()->second));
      write_or_print(ev_out, compare_models(results));
      return 0;
    }

    if (ablate_cmd->parsed()) {
      auto train = read_corpus(ab_train, permissive);
      auto test = read_corpus(ab_test, permissive);
      auto models = load_taggers(ab_models);
      auto kb = read_kb(ab_kb, ab_no_kb);
      AblationOptions options{ab_params, kb.has_value(), ab_jobs};
      auto report_tsv = ablate(models, kb ? &*kb : nullptr, train, test, options).to_tsv();
      write_or_print(ab_out, report_tsv);
      return 0;
    }

    if (kb_stats->parsed()) {
      auto kb = load_kb(binary::read_file(kb_path));
      std::cout << "entries\t" << kb.entry_count() << '\n'
                << "types\t" << kb.type_inventory().size() << '\n'
                << "skipped_multiword\t" << kb.skipped_multiword() << '\n';
      for (const auto& t : kb.type_inventory()) std::cout << "type\t" << t << '\n';
      return 0;
    }

    if (report->parsed()) {
      fs::path dir = report_dir;
      if (dir.empty()) {
        const char* env = std::getenv(kOutputDirEnv);
        if (!env || !*env) throw Error("report needs --output-dir or $GENRESTACK_OUTPUT_DIR");
        dir = env;
      }
      for (const char* name : {"status.tsv", "sizes.tsv", "comparison.tsv", "ablation.tsv",
                               "error_categories.tsv", "confusions.tsv"}) {
        auto path = dir / name;
        if (!fs::exists(path)) {
          std::cout << "## " << name << " (missing)\n\n";
          continue;
        }
        std::cout << "## " << name << '\n' << binary::read_file(path) << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
