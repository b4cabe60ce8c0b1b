#include "polyparse/tree.hpp"

#include "polyparse/error.hpp"

namespace polyparse {

DependencyTree gold_tree(const Sentence& sentence, const SymbolTable& deprels) {
  DependencyTree tree(static_cast<int>(sentence.size()));
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    tree.heads[i + 1] = sentence.tokens[i].gold_head;
    tree.labels[i + 1] = deprels.lookup(sentence.tokens[i].gold_deprel);
  }
  return tree;
}

DependencyTree unlabeled_tree(const Sentence& sentence) {
  DependencyTree tree(static_cast<int>(sentence.size()));
  for (std::size_t i = 0; i < sentence.size(); ++i) tree.heads[i + 1] = sentence.tokens[i].gold_head;
  return tree;
}

Sentence with_tree(Sentence sentence, const DependencyTree& tree, const SymbolTable& deprels) {
  if (tree.size() != static_cast<int>(sentence.size())) {
    throw StructureError("tree size does not match sentence length");
  }
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    sentence.tokens[i].gold_head = tree.heads[i + 1];
    sentence.tokens[i].gold_deprel = deprels.symbol(tree.labels[i + 1]);
  }
  sentence.annotated = true;
  return sentence;
}

Sentence with_heads(Sentence sentence, const DependencyTree& tree) {
  if (tree.size() != static_cast<int>(sentence.size())) {
    throw StructureError("tree size does not match sentence length");
  }
  for (std::size_t i = 0; i < sentence.size(); ++i) sentence.tokens[i].gold_head = tree.heads[i + 1];
  return sentence;
}

}  // namespace polyparse
