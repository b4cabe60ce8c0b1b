#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace polyparse {

// One word line of a CoNLL-U block. Columns we do not interpret are kept
// verbatim so that writing reproduces the input.
struct Token {
  int index = 1;
  std::string form;
  std::string lowercased_form;
  std::string lemma = "_";
  std::string upos;
  std::string xpos = "_";  // "_" when the treebank has no fine tags
  std::string feats = "_";
  std::string cluster;     // empty when unknown
  int gold_head = 0;       // 0 = root
  std::string gold_deprel;
  std::string deps = "_";
  std::string misc = "_";

  bool has_xpos() const { return !xpos.empty() && xpos != "_"; }
};

struct Sentence {
  std::vector<Token> tokens;
  std::string language;
  std::vector<std::string> metadata;  // comment lines, '#' included
  bool annotated = true;              // false when HEAD columns were "_"

  std::size_t size() const { return tokens.size(); }
};

struct Treebank {
  std::vector<Sentence> sentences;
  std::string language;
  std::string split;
  std::size_t skipped = 0;  // blocks rejected by tree validation

  std::size_t token_count() const;
};

struct ReadOptions {
  std::string language;           // default when no "# language = xx" comment
  std::string split;
  bool validate_trees = true;     // skip non-tree blocks, counting them
  bool allow_missing_heads = false;
};

Treebank read_conllu(std::istream& in, const ReadOptions& options = {});
Treebank read_conllu_file(const std::string& path, const ReadOptions& options = {});

void write_conllu(const Treebank& treebank, std::ostream& out);
void write_conllu_file(const Treebank& treebank, const std::string& path);

// Lowercases forms and truncates relation subtypes ("nmod:poss" -> "nmod").
Sentence preprocess(Sentence sentence);
void preprocess(Treebank& treebank);

// Empty string when the heads form a single-rooted tree over the sentence,
// otherwise a description of the violation.
std::string tree_violation(const Sentence& sentence);

// Unicode-aware lowercasing of a UTF-8 string.
std::string to_lower_utf8(const std::string& text);

// Language read from a "# language = xx" comment, or empty.
std::string metadata_language(const std::vector<std::string>& metadata);

}  // namespace polyparse
