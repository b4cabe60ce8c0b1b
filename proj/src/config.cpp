#include "polyparse/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>

#include "polyparse/error.hpp"
#include "polyparse/lexicon.hpp"

namespace polyparse {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T result{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, result);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("setting '" + key + "' expects a number, got '" + value + "'");
  }
  return result;
}

int positive(const std::string& key, const std::string& value) {
  const int v = parse_number<int>(key, value);
  if (v < 1) throw ConfigError("setting '" + key + "' must be positive");
  return v;
}

void require_file(const std::string& what, const std::string& path) {
  if (path.empty()) throw ConfigError(what + " path is required");
  if (!std::filesystem::exists(path)) throw ConfigError(what + " file not found: " + path);
}

}  // namespace

bool parse_bool(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError("expected a boolean, got '" + text + "'");
}

std::string RunConfig::default_language(std::size_t file_index) const {
  if (langs.empty()) return "";
  if (langs.size() == 1) return langs.front();
  return file_index < langs.size() ? langs[file_index] : "";
}

std::vector<std::pair<std::string, std::string>> read_config_pairs(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", number);
    auto key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    pairs.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return pairs;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return read_config_pairs(in);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "train", "dev", "langs", "embeddings", "clusters", "wals", "model", "seed", "patience",
      "epochs", "clip", "workers", "dev-sentences", "lexical", "language-vector", "fine-pos",
      "joint-tagging", "block-dropout", "unk-prob", "fine-pos-dropout", "word-dim", "cluster-dim",
      "pos-dim", "fine-pos-dim", "language-dim", "hidden-dim", "state-dim", "action-dim",
      "relation-dim", "layers", "tagger-input-dim", "tagger-hidden-dim", "tagger-layers"};
  return keys;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  auto& m = c.model_config;
  auto& d = m.dims;
  auto append = [&](std::vector<std::string>& list) {
    for (auto& item : split_list(value)) list.push_back(item);
  };
  if (key == "train") append(c.train);
  else if (key == "dev") append(c.dev);
  else if (key == "langs") append(c.langs);
  else if (key == "embeddings") c.embeddings = value;
  else if (key == "clusters") c.clusters = value;
  else if (key == "wals") c.wals = value;
  else if (key == "model") c.model = value;
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "patience") c.patience = positive(key, value);
  else if (key == "epochs") c.epochs = positive(key, value);
  else if (key == "clip") c.clip = parse_number<double>(key, value);
  else if (key == "workers") c.workers = positive(key, value);
  else if (key == "dev-sentences") c.dev_sentences = static_cast<std::size_t>(positive(key, value));
  else if (key == "lexical") m.lexical = parse_bool(value);
  else if (key == "language-vector") m.language_vector = parse_language_vector_mode(value);
  else if (key == "fine-pos") m.fine_pos = parse_bool(value);
  else if (key == "joint-tagging") m.joint_tagging = parse_bool(value);
  else if (key == "block-dropout") m.block_dropout = parse_block_dropout_variant(value);
  else if (key == "unk-prob") m.unk_prob = parse_number<double>(key, value);
  else if (key == "fine-pos-dropout") m.fine_pos_dropout = parse_number<double>(key, value);
  else if (key == "word-dim") d.word = positive(key, value);
  else if (key == "cluster-dim") d.cluster = positive(key, value);
  else if (key == "pos-dim") d.upos = positive(key, value);
  else if (key == "fine-pos-dim") d.xpos = positive(key, value);
  else if (key == "language-dim") d.language = positive(key, value);
  else if (key == "hidden-dim") d.hidden = positive(key, value);
  else if (key == "state-dim") d.state = positive(key, value);
  else if (key == "action-dim") d.action = positive(key, value);
  else if (key == "relation-dim") d.relation = positive(key, value);
  else if (key == "layers") d.layers = positive(key, value);
  else if (key == "tagger-input-dim") d.tagger_input = positive(key, value);
  else if (key == "tagger-hidden-dim") d.tagger_hidden = positive(key, value);
  else if (key == "tagger-layers") d.tagger_layers = positive(key, value);
  else throw ConfigError("unknown setting '" + key + "'");
}

void validate_for_training(const RunConfig& c) {
  if (c.train.empty()) throw ConfigError("no training treebanks given (--train)");
  for (const auto& path : c.train) require_file("training treebank", path);
  for (const auto& path : c.dev) require_file("development treebank", path);
  if (c.model.empty()) throw ConfigError("no output model path given (--model)");
  if (c.model_config.lexical) {
    if (c.embeddings.empty()) throw ConfigError("lexical features need --embeddings");
    require_file("embeddings", c.embeddings);
    if (!c.clusters.empty()) require_file("clusters", c.clusters);
  }
  const auto mode = c.model_config.language_vector;
  if (mode == LanguageVectorMode::kWordOrder || mode == LanguageVectorMode::kFullWals) {
    if (c.wals.empty()) throw ConfigError("language-vector " + to_string(mode) + " needs --wals");
    require_file("WALS table", c.wals);
  }
  if (c.langs.size() > 1 && c.langs.size() != c.train.size()) {
    throw ConfigError("--langs must name one language, or one per training file");
  }
  if (c.model_config.unk_prob < 0 || c.model_config.unk_prob > 1) {
    throw ConfigError("unk-prob must lie in [0, 1]");
  }
  if (c.model_config.fine_pos_dropout < 0 || c.model_config.fine_pos_dropout > 1) {
    throw ConfigError("fine-pos-dropout must lie in [0, 1]");
  }
}

LexicalResources load_resources(const RunConfig& c) {
  LexicalResources resources;
  if (!c.model_config.lexical) return resources;
  resources.pretrained = load_embeddings_file(c.embeddings);
  if (!c.clusters.empty()) resources.clusters = load_clusters_file(c.clusters);
  return resources;
}

TrainOptions train_options(const RunConfig& c) {
  TrainOptions options;
  options.max_epochs = c.epochs;
  options.patience = c.patience;
  options.seed = c.seed;
  options.workers = c.workers;
  options.sgd.clip_threshold = c.clip;
  options.dev_sentences_per_language = c.dev_sentences;
  return options;
}

}  // namespace polyparse
