#include "polyparse/model.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "polyparse/error.hpp"
#include "polyparse/projectivity.hpp"
#include "polyparse/serialization.hpp"

namespace polyparse {

using nlohmann::json;

void add_clusters(Vocabulary& vocab, const ClusterMap& clusters) {
  for (const auto& [word, cluster] : clusters.cluster_of) vocab.clusters.add(cluster);
}

namespace {

json dims_json(const ModelDims& d) {
  return {{"word", d.word},         {"cluster", d.cluster},
          {"upos", d.upos},         {"xpos", d.xpos},
          {"language", d.language}, {"hidden", d.hidden},
          {"state", d.state},       {"action", d.action},
          {"relation", d.relation}, {"layers", d.layers},
          {"tagger_input", d.tagger_input}, {"tagger_hidden", d.tagger_hidden},
          {"tagger_layers", d.tagger_layers}};
}

ModelDims dims_from_json(const json& j) {
  ModelDims d;
  d.word = j.at("word");
  d.cluster = j.at("cluster");
  d.upos = j.at("upos");
  d.xpos = j.at("xpos");
  d.language = j.at("language");
  d.hidden = j.at("hidden");
  d.state = j.at("state");
  d.action = j.at("action");
  d.relation = j.at("relation");
  d.layers = j.at("layers");
  d.tagger_input = j.at("tagger_input");
  d.tagger_hidden = j.at("tagger_hidden");
  d.tagger_layers = j.at("tagger_layers");
  return d;
}

json config_json(const ModelConfig& c) {
  return {{"lexical", c.lexical},
          {"language_vector", to_string(c.language_vector)},
          {"fine_pos", c.fine_pos},
          {"joint_tagging", c.joint_tagging},
          {"block_dropout", to_string(c.block_dropout)},
          {"unk_prob", c.unk_prob},
          {"fine_pos_dropout", c.fine_pos_dropout},
          {"dims", dims_json(c.dims)}};
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.lexical = j.at("lexical");
  c.language_vector = parse_language_vector_mode(j.at("language_vector"));
  c.fine_pos = j.at("fine_pos");
  c.joint_tagging = j.at("joint_tagging");
  c.block_dropout = parse_block_dropout_variant(j.at("block_dropout"));
  c.unk_prob = j.at("unk_prob");
  c.fine_pos_dropout = j.at("fine_pos_dropout");
  c.dims = dims_from_json(j.at("dims"));
  return c;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

}  // namespace

std::string config_to_json(const ModelConfig& config) { return config_json(config).dump(); }

ModelConfig config_from_json(const std::string& text) { return config_from(json::parse(text)); }

template <typename Scalar>
Model<Scalar>::Model(ModelConfig config, Vocabulary vocab, LexicalResources resources,
                     Eigen::MatrixXd language_vectors)
    : config_(std::move(config)), vocab_(std::move(vocab)), resources_(std::move(resources)) {
  if (vocab_.deprels.count() < 1) throw ConfigError("the vocabulary has no dependency relations");
  if (config_.joint_tagging && vocab_.upos.count() < 1) {
    throw ConfigError("joint tagging requires a coarse tagset");
  }
  reps_ = std::make_unique<Representations<Scalar>>(store_, config_, vocab_, resources_,
                                                    language_vectors);
  parser_ = std::make_unique<ParserNetwork<Scalar>>(store_, config_.dims, reps_->parse_dim(),
                                                    reps_->language_dim(),
                                                    vocab_.deprels.count());
  if (config_.joint_tagging) {
    if (reps_->tag_dim() == 0) {
      throw ConfigError("joint tagging needs lexical features or language embeddings");
    }
    tagger_ = std::make_unique<TaggerNetwork<Scalar>>(store_, config_.dims, reps_->tag_dim(),
                                                      vocab_.upos.id_space());
  }
}

template <typename Scalar>
std::vector<std::string> Model<Scalar>::languages() const {
  const auto& s = vocab_.languages.symbols();
  return {s.begin() + 1, s.end()};
}

template <typename Scalar>
EncodedSentence Model<Scalar>::encode(const Sentence& sentence, bool with_oracle) const {
  EncodedSentence out;
  out.language = vocab_.languages.lookup(sentence.language);
  if (out.language == SymbolTable::kUnk) {
    std::string supported;
    for (const auto& l : languages()) supported += (supported.empty() ? "" : ", ") + l;
    throw Error("unknown language '" + sentence.language + "' (model supports: " + supported + ")");
  }
  if (sentence.tokens.empty()) throw Error("cannot encode an empty sentence");
  for (const auto& token : sentence.tokens) {
    const std::string lower =
        token.lowercased_form.empty() ? to_lower_utf8(token.form) : token.lowercased_form;
    EncodedToken e;
    e.word = vocab_.words.lookup(lower);
    e.singleton = vocab_.is_singleton(e.word);
    if (resources_.has_pretrained()) {
      if (auto idx = resources_.pretrained.find(lower)) e.pretrained = *idx;
    }
    if (!token.cluster.empty()) {
      e.cluster = vocab_.clusters.lookup(token.cluster);
    } else if (auto c = resources_.clusters.find(lower)) {
      e.cluster = vocab_.clusters.lookup(*c);
    }
    e.upos = vocab_.upos.lookup(token.upos);
    e.xpos = vocab_.xpos.lookup(fine_tag(token));
    out.tokens.push_back(e);
    out.gold_upos.push_back(e.upos);
  }
  if (sentence.annotated) out.gold = gold_tree(sentence, vocab_.deprels);
  if (with_oracle) {
    if (!sentence.annotated) throw Error("training sentences need gold heads");
    out.gold_actions = oracle(projectivize(out.gold));
  }
  return out;
}

template <typename Scalar>
ad::Expr<Scalar> Model<Scalar>::language_expr(ad::Graph<Scalar>& g,
                                              const EncodedSentence& s) const {
  if (!reps_->uses_language()) return {};
  return reps_->language_embedding(g, s.language);
}

template <typename Scalar>
std::vector<ad::Expr<Scalar>> Model<Scalar>::tag_inputs(ad::Graph<Scalar>& g,
                                                        const EncodedSentence& s,
                                                        ad::Expr<Scalar> language) const {
  std::vector<ad::Expr<Scalar>> inputs;
  for (const auto& t : s.tokens) inputs.push_back(reps_->token_rep_tag(g, t, language));
  return inputs;
}

template <typename Scalar>
ad::Expr<Scalar> Model<Scalar>::loss(ad::Graph<Scalar>& g, const EncodedSentence& s,
                                     DropoutState& dropout, LossParts* parts) const {
  if (s.gold_actions.size() != 2 * s.size()) throw Error("sentence was encoded without an oracle");
  auto language = language_expr(g, s);
  std::vector<ad::Expr<Scalar>> tokens;
  ad::Expr<Scalar> tag_loss;
  if (tagger_) {
    auto scores = tagger_->scores(g, tag_inputs(g, s, language));
    tag_loss = tagger_->loss(g, scores, s.gold_upos);
    const auto predicted = tagger_->argmax(scores);
    for (std::size_t i = 0; i < s.size(); ++i) {
      tokens.push_back(reps_->token_rep_parse(g, s.tokens[i], language, dropout, predicted[i]));
    }
  } else {
    for (const auto& t : s.tokens) tokens.push_back(reps_->token_rep_parse(g, t, language, dropout));
  }
  auto run = parser_->run(g, tokens, language, &s.gold_actions);
  if (parts) {
    parts->parsing = static_cast<double>(run.loss.scalar());
    parts->tagging = tag_loss ? static_cast<double>(tag_loss.scalar()) : 0.0;
  }
  return tag_loss ? tag_loss + run.loss : run.loss;
}

template <typename Scalar>
std::vector<int> Model<Scalar>::predict_tags(const EncodedSentence& s) const {
  if (!tagger_) throw Error("this model was trained without joint tagging");
  ad::Graph<Scalar> g;
  auto language = language_expr(g, s);
  return tagger_->argmax(tagger_->scores(g, tag_inputs(g, s, language)));
}

template <typename Scalar>
ParseOutput Model<Scalar>::parse(const EncodedSentence& s) const {
  ad::Graph<Scalar> g;
  DropoutState test_time;
  auto language = language_expr(g, s);
  ParseOutput out;
  std::vector<ad::Expr<Scalar>> tokens;
  if (tagger_) {
    out.tags = tagger_->argmax(tagger_->scores(g, tag_inputs(g, s, language)));
    for (std::size_t i = 0; i < s.size(); ++i) {
      tokens.push_back(reps_->token_rep_parse(g, s.tokens[i], language, test_time, out.tags[i]));
    }
  } else {
    for (const auto& t : s.tokens) tokens.push_back(reps_->token_rep_parse(g, t, language, test_time));
  }
  auto run = parser_->run(g, tokens, language);
  out.tree = std::move(run.tree);
  out.actions = std::move(run.actions);
  out.log_probs = std::move(run.log_probs);
  return out;
}

template <typename Scalar>
Sentence Model<Scalar>::annotate(const Sentence& sentence, const ParseOutput& output) const {
  return with_tree(sentence, output.tree, vocab_.deprels);
}

template <typename Scalar>
void Model<Scalar>::save(std::ostream& out) const {
  json manifest;
  manifest["format_version"] = kContainerVersion;
  manifest["precision"] = sizeof(Scalar);
  manifest["config"] = config_json(config_);
  manifest["vocabulary_hash"] = hex64(vocab_.hash());
  manifest["pretrained_words"] = reps_->uses_pretrained() ? resources_.pretrained.words
                                                          : std::vector<std::string>{};
  manifest["clusters"] = reps_->uses_clusters() ? resources_.clusters.cluster_of
                                                : std::map<std::string, std::string>{};
  Container c;
  c.manifest = manifest.dump();
  c.vocabulary = vocab_.serialize();
  c.tensors = store_records(store_);
  write_container(out, c);
}

template <typename Scalar>
void Model<Scalar>::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path);
  save(out);
}

template <typename Scalar>
std::unique_ptr<Model<Scalar>> Model<Scalar>::load(std::istream& in) {
  Container c = read_container(in);
  json manifest = json::parse(c.manifest);
  ModelConfig config = config_from(manifest.at("config"));
  Vocabulary vocab = Vocabulary::deserialize(c.vocabulary);
  if (manifest.at("vocabulary_hash").get<std::string>() != hex64(vocab.hash())) {
    std::cerr << "warning: vocabulary hash mismatch; the model file may be inconsistent\n";
  }
  auto tensor = [&](const std::string& name) -> const TensorRecord* {
    for (const auto& t : c.tensors) {
      if (t.name == name) return &t;
    }
    return nullptr;
  };
  LexicalResources resources;
  const auto words = manifest.at("pretrained_words").get<std::vector<std::string>>();
  if (!words.empty()) {
    const TensorRecord* record = tensor("pretrained");
    if (!record) throw Error("model file lacks the pretrained embedding tensor");
    const Eigen::MatrixXd vectors = to_matrix<double>(*record);
    if (vectors.cols() != static_cast<Eigen::Index>(words.size())) {
      throw Error("pretrained word list does not match its tensor");
    }
    auto& table = resources.pretrained;
    table.dim = static_cast<int>(vectors.rows());
    table.words = words;
    for (std::size_t i = 0; i < words.size(); ++i) table.index[words[i]] = static_cast<int>(i);
    table.vectors = vectors;
  }
  resources.clusters.cluster_of =
      manifest.at("clusters").get<std::map<std::string, std::string>>();
  Eigen::MatrixXd language_vectors;
  if (config.language_vector != LanguageVectorMode::kNone) {
    const TensorRecord* record = tensor("language_vectors");
    if (!record) throw Error("model file lacks the language vector tensor");
    language_vectors = to_matrix<double>(*record);
  }
  auto model = std::make_unique<Model>(std::move(config), std::move(vocab), std::move(resources),
                                       language_vectors);
  load_records(model->store_, c.tensors);
  return model;
}

template <typename Scalar>
std::unique_ptr<Model<Scalar>> Model<Scalar>::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path);
  return load(in);
}

template class Model<float>;
template class Model<double>;

}  // namespace polyparse
