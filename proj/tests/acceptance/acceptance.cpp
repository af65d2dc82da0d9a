// Acceptance checks. Prints one PASS / FAIL / SKIP line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "genrestack/binary_io.hpp"
#include "genrestack/ensemble.hpp"
#include "genrestack/error.hpp"
#include "genrestack/eval.hpp"
#include "genrestack/perceptron.hpp"
#include "genrestack/pipeline.hpp"
#include "genrestack/text.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace genrestack;
using namespace genrestack::testing;
namespace fs = std::filesystem;

namespace {

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome pass(std::string d) { return {Verdict::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Verdict::kFail, std::move(d)}; }
Outcome check(bool ok, std::string d) { return {ok ? Verdict::kPass : Verdict::kFail, std::move(d)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

fs::path scratch_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() /
           ("genrestack-acceptance-" + tag + "-" + std::to_string(Rng(std::random_device{}()).next()));
  fs::create_directories(p);
  return p;
}

TagSet numbered_tags(std::size_t k) {
  std::vector<std::string> t;
  for (std::size_t i = 0; i < k; ++i) t.push_back("T" + std::to_string(10 + i));
  return TagSet(t);
}

// Random gold corpus over the given tags; forms come from a small pool so
// the known/unknown split is non-trivial.
Corpus random_corpus(Rng& rng, std::size_t sentences, std::size_t max_len, const TagSet& tags,
                     std::string genre = "g") {
  std::vector<Sentence> out;
  for (std::size_t s = 0; s < sentences; ++s) {
    Sentence sent{{}, "d" + std::to_string(s / 4), std::to_string(s)};
    auto len = 1 + rng.bounded(max_len);
    for (std::size_t i = 0; i < len; ++i)
      sent.tokens.push_back({"w" + std::to_string(rng.bounded(40)), tags.at(rng.bounded(tags.size()))});
    out.push_back(std::move(sent));
  }
  return Corpus(std::move(genre), std::move(out));
}

double token_accuracy(const Corpus& gold, const TagSequences& pred) {
  return evaluate(gold, pred, {}).per_token();
}

Outcome metric_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  int mismatches = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    auto tags = numbered_tags(2 + rng.bounded(14));
    auto gold = random_corpus(rng, 1 + rng.bounded(20), 30, tags);
    TagSequences pred;
    for (const auto& s : gold.sentences()) {
      TagSequence p;
      for (const auto& t : s.tokens)
        p.push_back(rng.bounded(2) ? t.tag : tags.at(rng.bounded(tags.size())));
      pred.push_back(p);
    }
    Vocabulary vocab;
    for (int w = 0; w < 40; ++w)
      if (rng.bounded(2)) vocab.insert("w" + std::to_string(w));
    auto r = evaluate(gold, pred, vocab);
    auto n = naive_evaluate(gold, pred, vocab);
    bool same = r.tokens == Accuracy{n.correct, n.tokens} &&
                r.sentences == Accuracy{n.perfect, n.sentences} &&
                r.known == Accuracy{n.known_correct, n.known} &&
                r.unknown == Accuracy{n.unknown_correct, n.unknown} &&
                r.confusions.size() == n.confusions.size();
    for (std::size_t i = 0; same && i < r.confusions.size(); ++i) {
      const auto& [g, p, c] = n.confusions[i];
      same = r.confusions[i] == Confusion{g, p, c};
    }
    mismatches += !same;
  }
  double secs = seconds_since(t0);
  return check(mismatches == 0 && secs < 30.0,
               std::to_string(trials) + " corpora, " + std::to_string(mismatches) +
                   " mismatches, " + fixed(secs, 2) + " s");
}

Outcome hand_counted() {
  Corpus gold("g", {{{{"dog", "NN"}, {"runs", "VBZ"}, {".", "."}}, "d", "1"},
                    {{{"cat", "NN"}, {"sits", "VBZ"}, {".", "."}}, "d", "2"}});
  TagSequences pred = {{"NN", "VBZ", "."}, {"NN", "NN", "."}};
  auto r = evaluate(gold, pred, {"dog", "runs", "."});
  bool counts = r.tokens == Accuracy{5, 6} && r.sentences == Accuracy{1, 2};
  bool identity = r.known.total + r.unknown.total == r.tokens.total &&
                  r.known.correct + r.unknown.correct == r.tokens.correct;
  return check(counts && identity, "per_token " + std::to_string(r.tokens.correct) + "/" +
                                       std::to_string(r.tokens.total) + ", full_sentence " +
                                       std::to_string(r.sentences.correct) + "/" +
                                       std::to_string(r.sentences.total) +
                                       (identity ? ", decomposition exact" : ", decomposition broken"));
}

Outcome perceptron_separable() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(77);
  const std::vector<std::string> tags = {"CC", "CD", "DT", "IN", "JJ", "NN", "NNP",
                                         "NNS", "PRP", "RB", "UH", "VB", "VBD", "VBP"};
  std::vector<std::pair<std::string, std::string>> lexicon;
  for (int i = 0; i < 400; ++i) lexicon.emplace_back("tok" + std::to_string(i), tags[rng.bounded(tags.size())]);
  std::vector<Sentence> sentences;
  for (int s = 0; s < 500; ++s) {
    Sentence sent{{}, "doc" + std::to_string(s / 10), std::to_string(s)};
    auto len = 3 + rng.bounded(20);
    for (std::size_t i = 0; i < len; ++i) {
      const auto& [form, tag] = lexicon[rng.bounded(lexicon.size())];
      sent.tokens.push_back({form, tag});
    }
    sentences.push_back(std::move(sent));
  }
  Corpus corpus("separable", sentences);
  auto model = train_perceptron(corpus, {.epochs = 5, .seed = 1});
  TagSequences pred;
  for (const auto& s : corpus.sentences()) pred.push_back(model.predict(s));
  auto r = evaluate(corpus, pred, {});
  double secs = seconds_since(t0);
  return check(r.tokens.correct == r.tokens.total && secs < 10.0,
               "training accuracy " + format_percent(r.tokens) + "% after 5 epochs on " +
                   std::to_string(corpus.token_count()) + " tokens, " + fixed(secs, 2) + " s");
}

// Each token belongs to one model's third (by a hash of its position). That
// model outputs the gold tag; the other two agree on the next tag in the set,
// which wins every vote.
std::vector<TaggerPtr> disjoint_experts(const TagSet& tags) {
  std::vector<TaggerPtr> models;
  for (std::size_t m = 0; m < 3; ++m) {
    models.push_back(std::make_shared<FunctionTagger>(
        "expert" + std::to_string(m), tags, [tags, m](const Sentence& s) {
          TagSequence out;
          for (std::size_t i = 0; i < s.size(); ++i) {
            auto owner = form_hash(s.sent_id + "#" + std::to_string(i)) % 3;
            auto g = tags.index_of(s.tokens[i].tag);
            out.push_back(owner == m ? s.tokens[i].tag : tags.at((g + 1) % tags.size()));
          }
          return out;
        }));
  }
  return models;
}

Outcome stacking_beats_voting() {
  auto t0 = std::chrono::steady_clock::now();
  auto tags = numbered_tags(6);
  Rng rng(404);
  auto train = random_corpus(rng, 400, 20, tags, "train");
  auto test = random_corpus(rng, 200, 20, tags, "test");
  auto models = disjoint_experts(tags);
  auto meta = train_meta(build_instances(models, nullptr, train), GbdtParams{});
  double stacked = token_accuracy(test, predict_meta(meta, models, nullptr, test));
  double voted = token_accuracy(test, majority_vote(models, test));
  double secs = seconds_since(t0);
  return check(stacked >= 0.95 && voted <= 0.40 && secs < 60.0,
               "meta " + fixed(stacked) + " vs vote " + fixed(voted) + ", " + fixed(secs, 2) + " s");
}

Outcome ablation_sanity() {
  auto tags = numbered_tags(5);
  double noise_delta = 0.0, informative_drop = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng(seed * 1000);
    auto train = random_corpus(rng, 300, 15, tags, "train");
    auto test = random_corpus(rng, 150, 15, tags, "test");
    std::vector<TaggerPtr> models = {noisy_oracle("informative", tags, 0.9, seed),
                                     noise_tagger("noise", tags, seed + 50),
                                     constant_tagger("weak", tags.at(0))};
    auto report = ablate(models, nullptr, train, test,
                         {.meta = GbdtParams{.seed = seed}, .use_kb = false});
    double full = report.rows[0].result.per_token();
    for (const auto& row : report.rows) {
      if (row.removed == "noise") noise_delta += std::abs(full - row.result.per_token()) * 100.0 / 3.0;
      if (row.removed == "informative") informative_drop += (full - row.result.per_token()) * 100.0 / 3.0;
    }
  }
  return check(noise_delta <= 1.0 && informative_drop >= 20.0,
               "mean |delta| without noise " + fixed(noise_delta, 2) +
                   " points, mean drop without informative " + fixed(informative_drop, 2) + " points");
}

// Proper nouns are written in lower case and only the gazetteer (capitalised
// entries) tells them apart from common nouns. Both base models say NN for
// every noun.
Outcome kb_effect() {
  Rng rng(99);
  std::string kb_text;
  std::vector<std::string> names, nouns;
  for (int i = 0; i < 60; ++i) {
    names.push_back("name" + std::to_string(i));
    kb_text += "Name" + std::to_string(i) + "\tPerson\n";
    nouns.push_back("noun" + std::to_string(i));
  }
  auto kb = load_kb(kb_text);
  auto make = [&](int sentences, const std::string& genre) {
    std::vector<Sentence> out;
    for (int s = 0; s < sentences; ++s) {
      Sentence sent{{}, genre + std::to_string(s / 5), std::to_string(s)};
      sent.tokens.push_back({"the", "DT"});
      bool proper = rng.bounded(2);
      sent.tokens.push_back(proper ? Token{names[rng.bounded(names.size())], "NNP"}
                                   : Token{nouns[rng.bounded(nouns.size())], "NN"});
      sent.tokens.push_back({"runs", "VBZ"});
      out.push_back(sent);
    }
    return Corpus(genre, out);
  };
  auto train = make(300, "train");
  auto test = make(200, "test");
  TagSet tags({"DT", "NN", "NNP", "VBZ"});
  auto nounify = [](const Sentence& s) {
    TagSequence out;
    for (const auto& t : s.tokens) out.push_back(t.tag == "NNP" ? "NN" : t.tag);
    return out;
  };
  std::vector<TaggerPtr> models = {
      std::make_shared<FunctionTagger>("lexical", tags, nounify),
      std::make_shared<FunctionTagger>("contextual", tags, nounify)};

  auto affected = [&](const TagSequences& pred) {
    Accuracy a;
    for (std::size_t s = 0; s < test.size(); ++s)
      for (std::size_t i = 0; i < test.sentences()[s].size(); ++i) {
        const auto& gold = test.sentences()[s].tokens[i].tag;
        if (gold != "NN" && gold != "NNP") continue;
        a.total += 1;
        a.correct += pred[s][i] == gold;
      }
    return a;
  };
  auto with = train_meta(build_instances(models, &kb, train), GbdtParams{});
  auto without = train_meta(build_instances(models, nullptr, train), GbdtParams{});
  auto a_with = affected(predict_meta(with, models, &kb, test));
  auto a_without = affected(predict_meta(without, models, nullptr, test));
  double gain = (a_with.value() - a_without.value()) * 100.0;
  return check(gain >= 10.0, "NN/NNP accuracy " + format_percent(a_with) + "% with KB, " +
                                 format_percent(a_without) + "% without (" + fixed(gain, 2) +
                                 " points)");
}

std::string report_bytes(const fs::path& dir) {
  std::string all;
  for (const auto* f : {"comparison.tsv", "ablation.tsv", "confusions.tsv", "errors.tsv",
                        "error_categories.tsv", "split_manifest.tsv", "sizes.tsv",
                        "predictions/ensemble.test.conllu", "models/meta.model"})
    all += std::string(f) + "\n" + binary::read_file(dir / f);
  return all;
}

Outcome determinism() {
  auto config = load_config(fs::path(GENRESTACK_SMOKE_DIR) / "smoke.ini");
  auto root = scratch_dir("determinism");
  std::ostringstream log;
  config.output_dir = root / "a";
  auto s1 = run_pipeline(config, log);
  config.output_dir = root / "b";
  config.jobs = 4;
  auto s2 = run_pipeline(config, log);
  if (s1.exit_code != 0 || s2.exit_code != 0) {
    fs::remove_all(root);
    return fail("pipeline failed: " + s1.message + s2.message);
  }
  bool same = report_bytes(root / "a") == report_bytes(root / "b");
  fs::remove_all(root);
  return check(same, same ? "two runs byte-identical" : "reports differ between runs");
}

// Reads every *.conllu under GUM_DIR, regroups documents by the genre in
// their "GUM_<genre>_<name>" ids and runs the pipeline with reddit as target.
Outcome gum_reddit() {
  const char* dir = std::getenv("GUM_DIR");
  if (!dir || !*dir) return {Verdict::kSkip, "GUM_DIR not set; GUM corpus unavailable"};
  auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, std::vector<Sentence>> by_genre;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.path().extension() != ".conllu") continue;
    auto c = parse_conllu(binary::read_file(entry.path()), "gum", {.permissive_xpos = true});
    for (const auto& s : c.sentences()) {
      auto parts = text::split(s.doc_id, '_');
      if (parts.size() < 3) continue;
      by_genre[parts[1]].push_back(s);
    }
  }
  if (!by_genre.count("reddit")) return fail("no GUM_reddit_* documents under " + std::string(dir));
  auto root = scratch_dir("gum");
  PipelineConfig config;
  for (auto& [genre, sentences] : by_genre) {
    auto path = root / (genre + ".conllu");
    binary::write_file(path, write_conllu(Corpus(genre, std::move(sentences))));
    config.genres[genre] = path;
  }
  config.target_genre = "reddit";
  config.split.sizes = {5727, 2489, 2966};
  config.output_dir = root / "out";
  config.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::ostringstream log;
  auto status = run_pipeline(config, log);
  if (status.exit_code != 0) return fail("pipeline failed in " + status.failed_stage + ": " + status.message);

  double ensemble = -1, best = -1;
  std::string best_name;
  std::istringstream rows(binary::read_file(config.output_dir / "comparison.tsv"));
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    auto cols = text::split(line, '\t');
    double acc = std::stod(cols[1]);
    if (cols[0] == "ensemble") ensemble = acc;
    else if (config.genres.count(cols[0]) && cols[0] != "reddit" && acc > best) {
      best = acc;
      best_name = cols[0];
    }
  }
  double secs = seconds_since(t0);
  fs::remove_all(root);
  return check(ensemble >= best && secs < 900.0,
               "ensemble " + fixed(ensemble, 2) + " vs best single " + best_name + " " +
                   fixed(best, 2) + ", " + fixed(secs, 1) + " s");
}

Outcome serialization() {
  auto root = scratch_dir("serialization");
  auto corpus = parse_conllu(binary::read_file(fs::path(GENRESTACK_SMOKE_DIR) / "news.conllu"), "news");
  auto other = parse_conllu(binary::read_file(fs::path(GENRESTACK_SMOKE_DIR) / "fiction.conllu"), "fiction");
  auto target = parse_conllu(binary::read_file(fs::path(GENRESTACK_SMOKE_DIR) / "reddit.conllu"), "reddit");
  auto kb = load_kb(binary::read_file(fs::path(GENRESTACK_SMOKE_DIR) / "kb.tsv"));

  auto a = train_perceptron(corpus, {.epochs = 3, .seed = 1});
  auto b = train_perceptron(other, {.epochs = 3, .seed = 1});
  save_model(a, root / "a.model");
  save_model(b, root / "b.model");
  std::vector<TaggerPtr> before = {std::make_shared<PerceptronTagger>(a), std::make_shared<PerceptronTagger>(b)};
  std::vector<TaggerPtr> after = {std::make_shared<PerceptronTagger>(load_model(root / "a.model")),
                                  std::make_shared<PerceptronTagger>(load_model(root / "b.model"))};
  auto meta = train_meta(build_instances(before, &kb, target), GbdtParams{.rounds = 20});
  save_meta(meta, root / "meta.model");
  auto meta_back = load_meta(root / "meta.model");

  bool base_same = true;
  for (const auto& s : target.sentences())
    base_same = base_same && before[0]->predict(s) == after[0]->predict(s) &&
                before[1]->predict(s) == after[1]->predict(s);
  bool meta_same = predict_meta(meta, before, &kb, target) == predict_meta(meta_back, after, &kb, target);

  auto bump_version = [&](const fs::path& p) {
    auto bytes = binary::read_file(p);
    bytes[8] = static_cast<char>(bytes[8] + 1);
    binary::write_file(p, bytes);
  };
  bump_version(root / "a.model");
  bump_version(root / "meta.model");
  bool base_raises = false, meta_raises = false;
  try {
    load_model(root / "a.model");
  } catch (const UnsupportedVersionError&) {
    base_raises = true;
  }
  try {
    load_meta(root / "meta.model");
  } catch (const UnsupportedVersionError&) {
    meta_raises = true;
  }
  fs::remove_all(root);
  return check(base_same && meta_same && base_raises && meta_raises,
               std::string("base ") + (base_same ? "identical" : "differs") + ", meta " +
                   (meta_same ? "identical" : "differs") + ", version mismatch " +
                   (base_raises && meta_raises ? "raises" : "does not raise"));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 metric oracle equivalence", metric_oracle},
      {"2 hand-counted fixtures", hand_counted},
      {"3 perceptron separable convergence", perceptron_separable},
      {"4 stacking beats voting", stacking_beats_voting},
      {"5 ablation sanity", ablation_sanity},
      {"6 knowledge-base feature effect", kb_effect},
      {"7 determinism", determinism},
      {"8 GUM reddit ensemble vs best single model", gum_reddit},
      {"9 serialization round-trips", serialization},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.verdict == Verdict::kPass ? "PASS" : o.verdict == Verdict::kFail ? "FAIL" : "SKIP";
    failures += o.verdict == Verdict::kFail;
    std::cout << tag << "  criterion " << name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
