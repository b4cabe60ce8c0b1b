#include "polyparse/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "polyparse/error.hpp"

namespace polyparse {

namespace {

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_spaces(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string field;
  while (in >> field) out.push_back(field);
  return out;
}

bool parse_double(const std::string& text, double& value) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_size(const std::string& text, long& value) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && value >= 0;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename F>
auto with_file(const std::string& path, F&& load) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return load(in);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::u32string decode_utf8(const std::string& s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 1;
    if (i + len > s.size()) len = 1;
    char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1f) : len == 3 ? (c & 0x0f) : (c & 0x07);
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
    out.push_back(cp);
    i += len;
  }
  return out;
}

}  // namespace

std::optional<int> EmbeddingTable::find(const std::string& word) const {
  auto it = index.find(word);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

void EmbeddingTable::set(const std::string& word, const Eigen::VectorXd& vector) {
  if (dim == 0 && words.empty()) dim = static_cast<int>(vector.size());
  if (vector.size() != dim) throw Error("embedding dimension mismatch for '" + word + "'");
  if (auto col = find(word)) {
    vectors.col(*col) = vector;
    return;
  }
  const int col = static_cast<int>(words.size());
  words.push_back(word);
  index.emplace(word, col);
  vectors.conservativeResize(dim, col + 1);
  vectors.col(col) = vector;
}

Eigen::VectorXd EmbeddingTable::vector(const std::string& word) const {
  auto col = find(word);
  if (!col) throw Error("no embedding for '" + word + "'");
  return vectors.col(*col);
}

std::optional<std::string> ClusterMap::find(const std::string& word) const {
  auto it = cluster_of.find(word);
  if (it == cluster_of.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable load_embeddings(std::istream& in) {
  EmbeddingTable table;
  std::vector<std::pair<std::string, Eigen::VectorXd>> rows;
  std::string line;
  std::size_t line_no = 0;
  int declared = -1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    auto fields = split_spaces(line);
    if (fields.empty()) continue;
    long a = 0, b = 0;
    if (line_no == 1 && fields.size() == 2 && parse_size(fields[0], a) && parse_size(fields[1], b)) {
      declared = static_cast<int>(b);
      continue;
    }
    const int dim = static_cast<int>(fields.size()) - 1;
    if (dim < 1) throw ParseError("embedding line has no values", line_no);
    if (declared < 0) declared = dim;
    if (dim != declared) {
      throw ParseError("expected " + std::to_string(declared) + " values, found " + std::to_string(dim),
                       line_no);
    }
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) {
      if (!parse_double(fields[k + 1], v(k))) {
        throw ParseError("invalid number '" + fields[k + 1] + "'", line_no);
      }
    }
    rows.emplace_back(fields[0], std::move(v));
  }
  table.dim = std::max(declared, 0);
  for (auto& [word, v] : rows) {
    if (table.find(word)) ++table.duplicates;
    table.set(word, v);
  }
  return table;
}

EmbeddingTable load_embeddings_file(const std::string& path) {
  return with_file(path, [](std::istream& in) { return load_embeddings(in); });
}

void write_embeddings(const EmbeddingTable& table, std::ostream& out) {
  out << table.size() << ' ' << table.dim << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.words[i];
    for (int k = 0; k < table.dim; ++k) out << ' ' << format_double(table.vectors(k, i));
    out << '\n';
  }
}

ClusterMap load_clusters(std::istream& in) {
  ClusterMap clusters;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_on(line, '\t');
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("expected '<cluster>\\t<word>\\t<frequency>'", line_no);
    }
    if (fields.size() == 3) {
      long freq = 0;
      if (!parse_size(fields[2], freq)) throw ParseError("invalid frequency '" + fields[2] + "'", line_no);
    }
    auto [it, inserted] = clusters.cluster_of.insert_or_assign(fields[1], fields[0]);
    if (!inserted) ++clusters.duplicates;
  }
  return clusters;
}

ClusterMap load_clusters_file(const std::string& path) {
  return with_file(path, [](std::istream& in) { return load_clusters(in); });
}

void write_clusters(const ClusterMap& clusters, std::ostream& out) {
  for (const auto& [word, cluster] : clusters.cluster_of) out << cluster << '\t' << word << "\t1\n";
}

std::vector<DictionaryEntry> load_dictionary(std::istream& in) {
  std::vector<DictionaryEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_on(line, '\t');
    if (fields.size() != 4) {
      throw ParseError("expected '<lang>\\t<target>\\t<english>\\t<probability>'", line_no);
    }
    DictionaryEntry e{fields[0], fields[1], fields[2], 0};
    if (!parse_double(fields[3], e.probability) || e.probability < 0) {
      throw ParseError("invalid probability '" + fields[3] + "'", line_no);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<DictionaryEntry> load_dictionary_file(const std::string& path) {
  return with_file(path, [](std::istream& in) { return load_dictionary(in); });
}

WalsTable load_wals(std::istream& in) {
  WalsTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_on(line, '\t');
    if (fields.size() < 2 || fields[0].empty()) {
      throw ParseError("expected '<language>\\t<genus>\\t<feature>=<value>'", line_no);
    }
    auto& lang = table.languages[fields[0]];
    if (!lang.genus.empty() && lang.genus != fields[1]) {
      throw ParseError("language '" + fields[0] + "' listed under two genera", line_no);
    }
    lang.genus = fields[1];
    for (std::size_t i = 2; i < fields.size(); ++i) {
      auto eq = fields[i].find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ParseError("expected <feature>=<value>, found '" + fields[i] + "'", line_no);
      }
      auto [it, inserted] =
          lang.features.insert_or_assign(fields[i].substr(0, eq), fields[i].substr(eq + 1));
      if (!inserted) ++table.duplicates;
    }
  }
  return table;
}

WalsTable load_wals_file(const std::string& path) {
  return with_file(path, [](std::istream& in) { return load_wals(in); });
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  const auto x = decode_utf8(a), y = decode_utf8(b);
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

EmbeddingTable robust_projection(const EmbeddingTable& english,
                                 const std::vector<DictionaryEntry>& dictionary,
                                 const std::vector<TargetWord>& vocabulary) {
  if (dictionary.empty()) throw Error("robust projection needs a nonempty dictionary");
  if (english.size() == 0) throw Error("robust projection needs English embeddings");

  // language -> target word -> english word -> accumulated probability
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> alignments;
  for (const auto& e : dictionary) {
    if (!english.find(e.english)) continue;
    alignments[e.language][e.target][e.english] += e.probability;
  }

  std::map<std::string, std::set<std::string>> targets;
  if (vocabulary.empty()) {
    for (const auto& e : dictionary) targets[e.language].insert(e.target);
  } else {
    for (const auto& w : vocabulary) targets[w.language].insert(w.word);
  }

  EmbeddingTable result;
  result.dim = english.dim;
  for (const auto& [language, words] : targets) {
    const auto& aligned = alignments[language];
    // Stage 1: weighted average over translations, weights renormalized.
    std::map<std::string, Eigen::VectorXd> projected;
    for (const auto& [word, translations] : aligned) {
      double total = 0;
      for (const auto& [en, p] : translations) total += p;
      Eigen::VectorXd v = Eigen::VectorXd::Zero(english.dim);
      if (total > 0) {
        for (const auto& [en, p] : translations) v += (p / total) * english.vector(en);
      } else {
        for (const auto& [en, p] : translations) v += english.vector(en);
        v /= static_cast<double>(translations.size());
      }
      projected.emplace(word, std::move(v));
    }
    // Stage 2: unaligned words average their distance-1 aligned neighbours.
    for (const auto& word : words) {
      if (auto it = projected.find(word); it != projected.end()) {
        result.set(word, it->second);
        continue;
      }
      const auto len = decode_utf8(word).size();
      Eigen::VectorXd v = Eigen::VectorXd::Zero(english.dim);
      int neighbours = 0;
      for (const auto& [other, vec] : projected) {
        const auto other_len = decode_utf8(other).size();
        if (other_len + 1 < len || other_len > len + 1) continue;
        if (edit_distance(word, other) == 1) {
          v += vec;
          ++neighbours;
        }
      }
      if (neighbours > 0) result.set(word, v / neighbours);
    }
  }
  return result;
}

ClusterMap project_clusters(const ClusterMap& english, const std::vector<DictionaryEntry>& dictionary) {
  if (english.cluster_of.empty() || dictionary.empty()) {
    throw Error("cluster projection needs English clusters and a dictionary");
  }
  std::map<std::string, std::map<std::string, double>> translations;
  for (const auto& e : dictionary) translations[e.target][e.english] += e.probability;
  std::map<std::string, std::pair<double, std::string>> best;
  for (const auto& [target, candidates] : translations) {
    for (const auto& [en, p] : candidates) {
      auto cluster = english.find(en);
      if (!cluster) continue;
      auto it = best.find(target);
      if (it == best.end() || p > it->second.first ||
          (p == it->second.first && *cluster < it->second.second)) {
        best[target] = {p, *cluster};
      }
    }
  }
  ClusterMap result;
  for (const auto& [word, choice] : best) result.cluster_of.emplace(word, choice.second);
  return result;
}

}  // namespace polyparse
