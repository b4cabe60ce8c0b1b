#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "polyparse/treebank.hpp"

namespace polyparse {

// Dense string <-> id map. Id 0 is reserved for the unknown symbol; observed
// symbols get ids 1..count() in insertion order.
class SymbolTable {
 public:
  static constexpr int kUnk = 0;
  static constexpr const char* kUnkSymbol = "<unk>";

  int add(const std::string& symbol);
  int lookup(const std::string& symbol) const;  // kUnk when absent
  bool contains(const std::string& symbol) const { return ids_.count(symbol) != 0; }
  const std::string& symbol(int id) const;

  // Number of observed symbols, UNK excluded.
  int count() const { return static_cast<int>(symbols_.size()) - 1; }
  // Rows needed by an embedding table indexed by this map.
  int id_space() const { return static_cast<int>(symbols_.size()); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  bool operator==(const SymbolTable& other) const { return symbols_ == other.symbols_; }

 private:
  std::vector<std::string> symbols_{kUnkSymbol};
  std::unordered_map<std::string, int> ids_;
};

struct Vocabulary {
  SymbolTable words;     // lowercased forms, shared across languages
  SymbolTable upos;
  SymbolTable xpos;
  SymbolTable clusters;
  SymbolTable deprels;
  SymbolTable languages;
  std::unordered_set<int> singletons;  // word ids seen exactly once in training

  bool is_singleton(int word_id) const { return singletons.count(word_id) != 0; }

  // Compact text form; the model container embeds it.
  std::string serialize() const;
  static Vocabulary deserialize(const std::string& text);
  std::uint64_t hash() const;
};

// Fine tag of a token; the coarse tag stands in when the treebank has none.
inline const std::string& fine_tag(const Token& token) {
  return token.has_xpos() ? token.xpos : token.upos;
}

// Treebanks must already be preprocessed. Throws on empty input.
Vocabulary build_vocabulary(const std::vector<Treebank>& treebanks);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace polyparse
