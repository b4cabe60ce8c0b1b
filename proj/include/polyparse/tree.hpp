#pragma once

#include <string>
#include <vector>

#include "polyparse/treebank.hpp"
#include "polyparse/vocabulary.hpp"

namespace polyparse {

// Heads and relation ids indexed by token position; slot 0 is the ROOT
// sentinel (head -1, label 0) so that token i lives at index i.
struct DependencyTree {
  std::vector<int> heads{-1};
  std::vector<int> labels{0};

  DependencyTree() = default;
  explicit DependencyTree(int n) : heads(n + 1, 0), labels(n + 1, 0) { heads[0] = -1; }

  int size() const { return static_cast<int>(heads.size()) - 1; }
  bool operator==(const DependencyTree&) const = default;
};

// Labels are looked up in `deprels`; unknown relations map to SymbolTable::kUnk.
DependencyTree gold_tree(const Sentence& sentence, const SymbolTable& deprels);
// Head-only tree, labels zero.
DependencyTree unlabeled_tree(const Sentence& sentence);

// Replaces HEAD/DEPREL of `sentence` with the tree's arcs.
Sentence with_tree(Sentence sentence, const DependencyTree& tree, const SymbolTable& deprels);
// Replaces only HEAD columns, keeping relation strings.
Sentence with_heads(Sentence sentence, const DependencyTree& tree);

}  // namespace polyparse
