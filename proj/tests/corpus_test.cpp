#include <doctest.h>

#include <algorithm>
#include <map>

#include "genrestack/corpus.hpp"
#include "genrestack/error.hpp"
#include "genrestack/random.hpp"

using namespace genrestack;

namespace {

const char* kFixture =
    "# newdoc id = doc1\n"
    "# sent_id = s1\n"
    "1\tThe\tthe\tDET\tNN\t_\t2\tdet\t_\t_\n"
    "2\tcat\tcat\tNOUN\tNN\t_\t3\tnsubj\t_\t_\n"
    "3\tsleeps\tsleep\tVERB\tVBZ\t_\t0\troot\t_\t_\n"
    "4\t.\t.\tPUNCT\t.\t_\t3\tpunct\t_\t_\n"
    "\n"
    "# sent_id = s2\n"
    "1\tDog\tdog\tNOUN\tNN\t_\t2\tnsubj\t_\t_\n"
    "2\truns\trun\tVERB\tVBZ\t_\t0\troot\t_\t_\n"
    "\n";

Corpus make_corpus(const std::vector<std::vector<std::pair<std::string, std::string>>>& sents,
                   std::string genre = "g") {
  std::vector<Sentence> out;
  int n = 0;
  for (const auto& s : sents) {
    Sentence sent;
    sent.doc_id = "d";
    sent.sent_id = std::to_string(++n);
    for (const auto& [form, tag] : s) sent.tokens.push_back({form, tag});
    out.push_back(sent);
  }
  return Corpus(std::move(genre), std::move(out));
}

// Documents with the given token counts, one sentence of up to 20 tokens each.
Corpus corpus_with_docs(const std::vector<std::size_t>& doc_sizes) {
  std::vector<Sentence> out;
  for (std::size_t d = 0; d < doc_sizes.size(); ++d) {
    std::size_t left = doc_sizes[d];
    int sent = 0;
    while (left > 0) {
      std::size_t n = std::min<std::size_t>(left, 20);
      Sentence s{{}, "doc" + std::to_string(d), std::to_string(++sent)};
      for (std::size_t i = 0; i < n; ++i) s.tokens.push_back({"w" + std::to_string(i), "NN"});
      out.push_back(s);
      left -= n;
    }
  }
  return Corpus("reddit", std::move(out));
}

}  // namespace

TEST_CASE("parse_conllu reads the fixture") {
  auto c = parse_conllu(kFixture, "news");
  CHECK(c.size() == 2);
  CHECK(c.token_count() == 6);
  CHECK(c.tagset().size() == 3);
  CHECK(c.tagset().tags() == std::vector<std::string>{".", "NN", "VBZ"});
  CHECK(c.sentences()[0].doc_id == "doc1");
  CHECK(c.sentences()[0].sent_id == "s1");
  CHECK(c.sentences()[1].doc_id == "doc1");
  CHECK(c.sentences()[1].tokens[0] == Token{"Dog", "NN"});
  CHECK(c.genre() == "news");
}

TEST_CASE("parse_conllu minimal token line") {
  auto c = parse_conllu("1\tok\t_\t_\tUH\t_\t_\t_\t_\t_\n", "reddit");
  REQUIRE(c.size() == 1);
  REQUIRE(c.token_count() == 1);
  CHECK(c.sentences()[0].tokens[0].tag == "UH");
  CHECK(c.sentences()[0].sent_id == "1");
  CHECK(c.sentences()[0].doc_id == "1");
}

TEST_CASE("parse_conllu reports the line of a short row") {
  std::string text = "1\tok\t_\t_\tUH\n2\tbad\t_\n";
  try {
    parse_conllu(text, "g");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("parse_conllu rejects empty input and bare XPOS placeholders") {
  CHECK_THROWS_AS(parse_conllu("", "g"), ParseError);
  CHECK_THROWS_AS(parse_conllu("\n\n# sent_id = x\n\n", "g"), ParseError);
  const char* missing = "1\tok\t_\tINTJ\t_\t_\t_\t_\t_\t_\n";
  CHECK_THROWS_AS(parse_conllu(missing, "g"), ParseError);
  auto c = parse_conllu(missing, "g", ParseOptions{.permissive_xpos = true});
  CHECK(c.sentences()[0].tokens[0].tag == kPlaceholderTag);
}

TEST_CASE("parse_conllu skips multiword ranges and empty nodes") {
  const char* text =
      "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdo\t_\t_\tVBP\t_\t_\t_\t_\t_\n"
      "2\tn't\t_\t_\tRB\t_\t_\t_\t_\t_\n"
      "2.1\tgo\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "3\tgo\t_\t_\tVB\t_\t_\t_\t_\t_\r\n";
  auto c = parse_conllu(text, "g");
  REQUIRE(c.token_count() == 3);
  CHECK(c.sentences()[0].tokens[2] == Token{"go", "VB"});
}

TEST_CASE("synthesized ids without newdoc give one document per sentence") {
  const char* text =
      "1\ta\t_\t_\tDT\n\n"
      "# sent_id = named\n1\tb\t_\t_\tDT\n\n"
      "1\tc\t_\t_\tDT\n";
  auto c = parse_conllu(text, "g");
  REQUIRE(c.size() == 3);
  CHECK(c.sentences()[0].sent_id == "1");
  CHECK(c.sentences()[1].sent_id == "named");
  CHECK(c.sentences()[2].sent_id == "3");
  CHECK(c.sentences()[0].doc_id != c.sentences()[2].doc_id);
}

TEST_CASE("duplicate sentence ids are rejected") {
  const char* text = "# newdoc id = d\n# sent_id = a\n1\tx\t_\t_\tDT\n\n# sent_id = a\n1\ty\t_\t_\tDT\n";
  CHECK_THROWS_AS(parse_conllu(text, "g"), Error);
}

TEST_CASE("write_conllu round-trips and carries predictions in MISC") {
  auto c = parse_conllu(kFixture, "news");
  auto again = parse_conllu(write_conllu(c), "news");
  CHECK(again.sentences() == c.sentences());

  TagSequences pred = {{"NN", "NN", "VBZ", "."}, {"NN", "NN"}};
  auto text = write_conllu(c, pred);
  std::size_t token_lines = 0, with_pred = 0;
  for (const auto& line : [&] {
         std::vector<std::string> lines;
         std::string cur;
         for (char ch : text) {
           if (ch == '\n') {
             lines.push_back(cur);
             cur.clear();
           } else {
             cur += ch;
           }
         }
         return lines;
       }()) {
    if (line.empty() || line[0] == '#') continue;
    ++token_lines;
    with_pred += line.find("PredXPOS=") != std::string::npos;
  }
  CHECK(token_lines == 6);
  CHECK(with_pred == 6);
  // Gold XPOS survives, predictions read back.
  CHECK(parse_conllu(text, "news").sentences() == c.sentences());
  CHECK(read_predictions(text, c, PredictionSource::kMisc) == pred);
}

TEST_CASE("write_conllu names the sentence with too few predictions") {
  auto c = parse_conllu(kFixture, "news");
  TagSequences pred = {{"NN", "NN", "VBZ", "."}, {"NN"}};
  try {
    write_conllu(c, pred);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("'s2'") != std::string::npos);
  }
}

TEST_CASE("read_predictions from a tagger's XPOS column") {
  auto gold = parse_conllu(kFixture, "news");
  std::string external =
      "1\tThe\t_\t_\tDT\n2\tcat\t_\t_\tNN\n3\tsleeps\t_\t_\tVBZ\n4\t.\t_\t_\t.\n\n"
      "1\tDog\t_\t_\tNNP\n2\truns\t_\t_\tVBZ\n";
  auto tags = read_predictions(external, gold, PredictionSource::kXpos);
  CHECK(tags == TagSequences{{"DT", "NN", "VBZ", "."}, {"NNP", "VBZ"}});
  CHECK_THROWS_AS(read_predictions(external, gold, PredictionSource::kMisc), ParseError);
  CHECK_THROWS_AS(read_predictions("1\tx\t_\t_\tDT\n", gold, PredictionSource::kXpos), Error);
}

TEST_CASE("round trip holds on random corpora") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Sentence> sents;
    auto n = 1 + rng.bounded(6);
    for (std::size_t s = 0; s < n; ++s) {
      Sentence sent{{}, "doc" + std::to_string(rng.bounded(3)), "s" + std::to_string(s)};
      auto len = 1 + rng.bounded(8);
      for (std::size_t i = 0; i < len; ++i)
        sent.tokens.push_back({std::string(1 + rng.bounded(4), static_cast<char>('a' + rng.bounded(26))),
                               std::string(1, static_cast<char>('A' + rng.bounded(5)))});
      sents.push_back(sent);
    }
    Corpus c("g", sents);
    auto once = parse_conllu(write_conllu(c), "g");
    CHECK(once.sentences() == c.sentences());
    CHECK(write_conllu(once) == write_conllu(c));
  }
}

TEST_CASE("TagSet indexes sorted unique tags") {
  TagSet t({"VB", "NN", "NN", "."});
  CHECK(t.size() == 3);
  CHECK(t.index_of(".") == 0);
  CHECK(t.index_of("NN") == 1);
  CHECK(t.index_of("VB") == 2);
  CHECK_FALSE(t.contains("JJ"));
  CHECK_THROWS_AS(t.index_of("JJ"), Error);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.index_of(t.at(i)) == i);
}

TEST_CASE("make_splits with all weight on train") {
  auto c = corpus_with_docs({30, 40, 50});
  auto r = make_splits(c, SplitSpec{SplitUnit::kDocument, {120, 0, 0}, 7});
  CHECK(r.train.token_count() == 120);
  CHECK(r.dev.empty());
  CHECK(r.test.empty());
}

TEST_CASE("make_splits on a Reddit-sized corpus lands within one document of each target") {
  // 11,182 tokens in documents of 150-600 tokens.
  Rng rng(3);
  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  while (total < 11182) {
    std::size_t s = std::min<std::size_t>(150 + rng.bounded(451), 11182 - total);
    sizes.push_back(s);
    total += s;
  }
  const auto max_doc = *std::max_element(sizes.begin(), sizes.end());
  auto c = corpus_with_docs(sizes);
  REQUIRE(c.token_count() == 11182);
  const std::array<std::size_t, 3> targets{5727, 2489, 2966};
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    auto r = make_splits(c, SplitSpec{SplitUnit::kDocument, targets, seed});
    for (auto part : {Split::kTrain, Split::kDev, Split::kTest}) {
      auto got = static_cast<long>(r.part(part).token_count());
      auto want = static_cast<long>(targets[static_cast<int>(part)]);
      CHECK(std::abs(got - want) <= static_cast<long>(max_doc));
    }
    CHECK(r.train.token_count() + r.dev.token_count() + r.test.token_count() == c.token_count());
  }
}

TEST_CASE("make_splits keeps documents whole and is deterministic") {
  auto c = corpus_with_docs({45, 12, 60, 33, 27, 80, 5, 41});
  SplitSpec spec{SplitUnit::kDocument, {100, 50, 50}, 11};
  auto a = make_splits(c, spec);
  auto b = make_splits(c, spec);
  CHECK(write_manifest(a) == write_manifest(b));
  std::map<std::string, std::set<int>> where;
  for (auto part : {Split::kTrain, Split::kDev, Split::kTest})
    for (const auto& s : a.part(part).sentences()) where[s.doc_id].insert(static_cast<int>(part));
  for (const auto& [doc, parts] : where) CHECK(parts.size() == 1);
  CHECK(a.manifest.size() == 8);
}

TEST_CASE("make_splits partitions random corpora exactly") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> sizes(3 + rng.bounded(20));
    for (auto& s : sizes) s = 1 + rng.bounded(70);
    auto c = corpus_with_docs(sizes);
    SplitSpec spec{rng.bounded(2) ? SplitUnit::kDocument : SplitUnit::kSentence,
                   {1 + rng.bounded(500), 1 + rng.bounded(200), 1 + rng.bounded(200)},
                   rng.next()};
    auto r = make_splits(c, spec);
    CHECK(r.train.token_count() + r.dev.token_count() + r.test.token_count() == c.token_count());
    CHECK(r.train.size() + r.dev.size() + r.test.size() == c.size());
  }
}

TEST_CASE("make_splits needs a unit per non-empty split") {
  auto c = corpus_with_docs({10, 10});
  CHECK_THROWS_AS(make_splits(c, SplitSpec{SplitUnit::kDocument, {1, 1, 1}, 1}), Error);
  CHECK_NOTHROW(make_splits(c, SplitSpec{SplitUnit::kSentence, {1, 0, 1}, 1}));
}

TEST_CASE("concat reproduces the multi-genre training sizes") {
  const std::map<std::string, std::size_t> sizes = {
      {"reddit", 5727},     {"academic", 11868}, {"bio", 12562},    {"fiction", 12843},
      {"interview", 18037}, {"news", 14092},     {"voyage", 14955}, {"whow", 16920}};
  std::vector<Corpus> all, without_reddit;
  for (const auto& [genre, n] : sizes) {
    std::vector<Sentence> sents;
    std::size_t left = n;
    int id = 0;
    while (left > 0) {
      auto len = std::min<std::size_t>(left, 25);
      Sentence s{{}, genre, std::to_string(++id)};
      for (std::size_t i = 0; i < len; ++i) s.tokens.push_back({"x", "NN"});
      sents.push_back(s);
      left -= len;
    }
    Corpus c(genre, sents);
    all.push_back(c);
    if (genre != "reddit") without_reddit.push_back(c);
  }
  CHECK(concat(all, "multiple-genres").token_count() == 107004);
  CHECK(concat(without_reddit, "multiple-genres-without-reddit").token_count() == 101277);
}

TEST_CASE("concat preserves order, unions tag sets and disambiguates ids") {
  auto a = make_corpus({{{"the", "DT"}, {"Cat", "NN"}}}, "a");
  auto b = make_corpus({{{"runs", "VBZ"}}}, "b");
  auto c = concat({a, b}, "ab");
  CHECK(c.genre() == "ab");
  CHECK(c.size() == 2);
  CHECK(c.token_count() == 3);
  CHECK(c.tagset() == TagSet({"DT", "NN", "VBZ"}));
  CHECK(c.sentences()[0].tokens[0].form == "the");
  // Both inputs use doc "d", sentence "1".
  CHECK(c.sentences()[1].doc_id == "b:d");

  auto single = concat({a}, "renamed");
  CHECK(single.sentences() == a.sentences());
  CHECK(single.genre() == "renamed");
  CHECK_THROWS_AS(concat({}, "x"), Error);
}

TEST_CASE("vocabulary is the exact case-sensitive form set") {
  auto c = make_corpus({{{"the", "DT"}, {"Cat", "NN"}, {"the", "DT"}}});
  CHECK(vocabulary(c) == Vocabulary{"the", "Cat"});

  auto a = make_corpus({{{"x", "A"}, {"y", "A"}}}, "a");
  auto b = make_corpus({{{"y", "A"}, {"Y", "A"}}}, "b");
  auto u = vocabulary(concat({a, b}, "ab"));
  Vocabulary expected = vocabulary(a);
  auto vb = vocabulary(b);
  expected.insert(vb.begin(), vb.end());
  CHECK(u == expected);
  CHECK(u.size() == 3);
}
