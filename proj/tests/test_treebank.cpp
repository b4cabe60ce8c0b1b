#include <doctest.h>

#include <sstream>

#include "polyparse/error.hpp"
#include "polyparse/treebank.hpp"
#include "polyparse/vocabulary.hpp"
#include "support/testing.hpp"

using namespace polyparse;

namespace {

const char* kTwoTokens =
    "1\tthe\t_\tDET\t_\t_\t2\tdet\t_\t_\n"
    "2\tcat\t_\tNOUN\t_\t_\t0\troot\t_\t_\n"
    "\n";

Treebank read(const std::string& text, ReadOptions options = {}) {
  std::istringstream in(text);
  return read_conllu(in, options);
}

std::string write(const Treebank& tb) {
  std::ostringstream out;
  write_conllu(tb, out);
  return out.str();
}

}  // namespace

TEST_CASE("two word lines make a two-token sentence") {
  auto tb = read(kTwoTokens);
  REQUIRE(tb.sentences.size() == 1);
  const auto& s = tb.sentences[0];
  REQUIRE(s.size() == 2);
  CHECK(s.tokens[0].form == "the");
  CHECK(s.tokens[0].gold_head == 2);
  CHECK(s.tokens[1].gold_head == 0);
  CHECK(s.tokens[1].gold_deprel == "root");
}

TEST_CASE("multiword ranges and empty nodes are dropped") {
  auto tb = read(
      "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tde\t_\tADP\t_\t_\t2\tcase\t_\t_\n"
      "2\tel\t_\tDET\t_\t_\t0\troot\t_\t_\n"
      "2.1\tx\t_\tX\t_\t_\t_\t_\t_\t_\n"
      "\n");
  REQUIRE(tb.sentences.size() == 1);
  CHECK(tb.sentences[0].size() == 2);
}

TEST_CASE("non-integer HEAD is a parse error naming the line") {
  try {
    read("# sent_id = 1\n1\tthe\t_\tDET\t_\t_\tx\tdet\t_\t_\n\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("head index out of range is a structural error") {
  CHECK_THROWS_AS(read("1\tthe\t_\tDET\t_\t_\t5\tdet\t_\t_\n\n"), StructureError);
}

TEST_CASE("wrong column count is a parse error") {
  CHECK_THROWS_AS(read("1\tthe\tDET\n\n"), ParseError);
}

TEST_CASE("non-tree blocks are skipped and counted") {
  auto tb = read(
      "1\ta\t_\tX\t_\t_\t0\troot\t_\t_\n"
      "2\tb\t_\tX\t_\t_\t0\troot\t_\t_\n"
      "\n"
      "1\ta\t_\tX\t_\t_\t2\tdep\t_\t_\n"
      "2\tb\t_\tX\t_\t_\t1\tdep\t_\t_\n"
      "\n" +
      std::string(kTwoTokens));
  CHECK(tb.sentences.size() == 1);
  CHECK(tb.skipped == 2);
}

TEST_CASE("language comment overrides the default language") {
  ReadOptions options;
  options.language = "en";
  auto tb = read("# language = de\n" + std::string(kTwoTokens) + kTwoTokens, options);
  REQUIRE(tb.sentences.size() == 2);
  CHECK(tb.sentences[0].language == "de");
  CHECK(tb.sentences[1].language == "en");
}

TEST_CASE("preprocess lowercases forms and strips relation subtypes") {
  auto s = testing::make_sentence(
      "en", {{"The", "DET", 2, "det"}, {"Cat", "NOUN", 3, "nmod:poss"}, {"ÉCOLE", "NOUN", 0, "dobj"}});
  CHECK(s.tokens[0].lowercased_form == "the");
  CHECK(s.tokens[1].gold_deprel == "nmod");
  CHECK(s.tokens[2].gold_deprel == "dobj");
  CHECK(s.tokens[2].lowercased_form == "école");
  for (const auto& t : s.tokens) {
    CHECK(t.gold_deprel.find(':') == std::string::npos);
    CHECK(t.lowercased_form == to_lower_utf8(t.form));
  }
}

TEST_CASE("read then write is byte-identical for word lines and comments") {
  const std::string text =
      "# sent_id = a1\n"
      "# text = The cat\n"
      "1\tThe\tthe\tDET\tDT\tDefinite=Def\t2\tdet\t_\t_\n"
      "2\tcat\tcat\tNOUN\tNN\tNumber=Sing\t0\troot\t_\tSpaceAfter=No\n"
      "\n"
      "1\tSleep\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
      "\n";
  auto tb = read(text);
  CHECK(write(tb) == text);
  CHECK(write(read(write(tb))) == text);
}

TEST_CASE("written HEAD column holds predicted heads") {
  auto tb = read(kTwoTokens);
  tb.sentences[0].tokens[0].gold_head = 0;
  tb.sentences[0].tokens[1].gold_head = 1;
  auto again = read(write(tb), {"", "", false, false});
  CHECK(again.sentences[0].tokens[1].gold_head == 1);
}

TEST_CASE("empty treebank writes nothing") {
  CHECK(write(Treebank{}).empty());
  CHECK(read("").sentences.empty());
}

TEST_CASE("unannotated input round-trips with underscores") {
  ReadOptions options;
  options.allow_missing_heads = true;
  options.validate_trees = false;
  const std::string text = "1\ta\t_\tX\t_\t_\t_\t_\t_\t_\n\n";
  auto tb = read(text, options);
  REQUIRE(tb.sentences.size() == 1);
  CHECK_FALSE(tb.sentences[0].annotated);
  CHECK(write(tb) == text);
}

TEST_CASE("vocabulary records singletons, languages and UNK") {
  std::vector<Treebank> tbs;
  for (int l = 0; l < 7; ++l) {
    Treebank tb;
    tb.language = "l" + std::to_string(l);
    tb.sentences.push_back(testing::make_sentence(
        tb.language, {{"common", "NOUN", 0, "root"}, {"w" + std::to_string(l), "ADJ", 1, "amod"}}));
    tbs.push_back(tb);
  }
  auto vocab = build_vocabulary(tbs);
  CHECK(vocab.languages.count() == 7);
  CHECK(vocab.is_singleton(vocab.words.lookup("w3")));
  CHECK_FALSE(vocab.is_singleton(vocab.words.lookup("common")));
  CHECK(vocab.words.lookup("unseen") == SymbolTable::kUnk);
  for (int id = 1; id <= vocab.words.count(); ++id) CHECK(id != SymbolTable::kUnk);
  // No fine tags in the data: the coarse tags stand in.
  CHECK(vocab.xpos.contains("NOUN"));
  CHECK(vocab.xpos.contains("ADJ"));
}

TEST_CASE("vocabulary serialization keeps ids stable") {
  auto data = testing::toy_multilingual(5, 3);
  auto vocab = build_vocabulary(data.train);
  auto back = Vocabulary::deserialize(vocab.serialize());
  CHECK(back.words == vocab.words);
  CHECK(back.upos == vocab.upos);
  CHECK(back.xpos == vocab.xpos);
  CHECK(back.deprels == vocab.deprels);
  CHECK(back.languages == vocab.languages);
  CHECK(back.singletons == vocab.singletons);
  CHECK(back.hash() == vocab.hash());
}

TEST_CASE("empty training data is rejected") {
  CHECK_THROWS_AS(build_vocabulary({}), Error);
  CHECK_THROWS_AS(build_vocabulary({Treebank{}}), Error);
}
