#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace polyparse {

// Word vectors stored column-wise.
struct EmbeddingTable {
  int dim = 0;
  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;
  Eigen::MatrixXd vectors;  // dim x words.size()
  std::size_t duplicates = 0;

  std::size_t size() const { return words.size(); }
  std::optional<int> find(const std::string& word) const;
  // Inserts or overwrites.
  void set(const std::string& word, const Eigen::VectorXd& vector);
  Eigen::VectorXd vector(const std::string& word) const;  // throws when absent
};

struct ClusterMap {
  std::map<std::string, std::string> cluster_of;  // word -> cluster id
  std::size_t duplicates = 0;

  std::optional<std::string> find(const std::string& word) const;
};

struct DictionaryEntry {
  std::string language;
  std::string target;
  std::string english;
  double probability = 0;
};

struct WalsLanguage {
  std::string genus;
  std::map<std::string, std::string> features;  // feature id -> value
};

struct WalsTable {
  std::map<std::string, WalsLanguage> languages;
  std::size_t duplicates = 0;
};

// "<count> <dim>" header optional; body "word v1 ... vd".
EmbeddingTable load_embeddings(std::istream& in);
EmbeddingTable load_embeddings_file(const std::string& path);
void write_embeddings(const EmbeddingTable& table, std::ostream& out);

// "<cluster>\t<word>\t<frequency>"
ClusterMap load_clusters(std::istream& in);
ClusterMap load_clusters_file(const std::string& path);
void write_clusters(const ClusterMap& clusters, std::ostream& out);

// "<target-lang>\t<target-word>\t<english-word>\t<probability>"
std::vector<DictionaryEntry> load_dictionary(std::istream& in);
std::vector<DictionaryEntry> load_dictionary_file(const std::string& path);

// "<language>\t<genus>\t<feature>=<value>[\t<feature>=<value>...]"
WalsTable load_wals(std::istream& in);
WalsTable load_wals_file(const std::string& path);

// Levenshtein distance over Unicode code points.
std::size_t edit_distance(const std::string& a, const std::string& b);

struct TargetWord {
  std::string language;
  std::string word;
};

// Target-language embeddings as alignment-weighted averages of English
// vectors, with an edit-distance-1 fallback for unaligned words. Words that
// remain unresolved are absent from the result. When `vocabulary` is empty the
// dictionary's target words are used.
EmbeddingTable robust_projection(const EmbeddingTable& english,
                                 const std::vector<DictionaryEntry>& dictionary,
                                 const std::vector<TargetWord>& vocabulary = {});

// Each target word takes the cluster of its most probable English
// translation; ties go to the lexicographically smallest cluster id.
ClusterMap project_clusters(const ClusterMap& english, const std::vector<DictionaryEntry>& dictionary);

}  // namespace polyparse
