#include "polyparse/vocabulary.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "polyparse/error.hpp"

namespace polyparse {

int SymbolTable::add(const std::string& symbol) {
  auto it = ids_.find(symbol);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(symbols_.size());
  symbols_.push_back(symbol);
  ids_.emplace(symbol, id);
  return id;
}

int SymbolTable::lookup(const std::string& symbol) const {
  auto it = ids_.find(symbol);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& SymbolTable::symbol(int id) const {
  if (id < 0 || id >= id_space()) throw Error("symbol id " + std::to_string(id) + " out of range");
  return symbols_[id];
}

Vocabulary build_vocabulary(const std::vector<Treebank>& treebanks) {
  Vocabulary vocab;
  std::map<int, int> frequency;
  std::size_t sentences = 0;
  for (const auto& treebank : treebanks) {
    for (const auto& sentence : treebank.sentences) {
      ++sentences;
      vocab.languages.add(sentence.language);
      for (const auto& token : sentence.tokens) {
        ++frequency[vocab.words.add(token.lowercased_form)];
        vocab.upos.add(token.upos);
        vocab.xpos.add(fine_tag(token));
        if (!token.cluster.empty()) vocab.clusters.add(token.cluster);
        vocab.deprels.add(token.gold_deprel);
      }
    }
  }
  if (sentences == 0) throw Error("cannot build a vocabulary from empty training data");
  for (auto [id, count] : frequency) {
    if (count == 1) vocab.singletons.insert(id);
  }
  return vocab;
}

namespace {

nlohmann::json table_json(const SymbolTable& table) {
  return std::vector<std::string>(table.symbols().begin() + 1, table.symbols().end());
}

SymbolTable table_from_json(const nlohmann::json& j) {
  SymbolTable table;
  for (const auto& s : j) table.add(s.get<std::string>());
  return table;
}

}  // namespace

std::string Vocabulary::serialize() const {
  std::vector<int> single(singletons.begin(), singletons.end());
  std::sort(single.begin(), single.end());
  nlohmann::json j;
  j["words"] = table_json(words);
  j["upos"] = table_json(upos);
  j["xpos"] = table_json(xpos);
  j["clusters"] = table_json(clusters);
  j["deprels"] = table_json(deprels);
  j["languages"] = table_json(languages);
  j["singletons"] = single;
  return j.dump();
}

Vocabulary Vocabulary::deserialize(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  Vocabulary v;
  v.words = table_from_json(j.at("words"));
  v.upos = table_from_json(j.at("upos"));
  v.xpos = table_from_json(j.at("xpos"));
  v.clusters = table_from_json(j.at("clusters"));
  v.deprels = table_from_json(j.at("deprels"));
  v.languages = table_from_json(j.at("languages"));
  for (int id : j.at("singletons")) v.singletons.insert(id);
  return v;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t Vocabulary::hash() const { return fnv1a64(serialize()); }

}  // namespace polyparse
