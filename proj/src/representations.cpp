#include "polyparse/representations.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "polyparse/error.hpp"

namespace polyparse {

std::string to_string(LanguageVectorMode mode) {
  switch (mode) {
    case LanguageVectorMode::kNone:
      return "none";
    case LanguageVectorMode::kLangId:
      return "lang-id";
    case LanguageVectorMode::kWordOrder:
      return "word-order";
    case LanguageVectorMode::kFullWals:
      return "full-wals";
  }
  return "none";
}

LanguageVectorMode parse_language_vector_mode(const std::string& text) {
  if (text == "none") return LanguageVectorMode::kNone;
  if (text == "lang-id") return LanguageVectorMode::kLangId;
  if (text == "word-order") return LanguageVectorMode::kWordOrder;
  if (text == "full-wals") return LanguageVectorMode::kFullWals;
  throw ConfigError("unknown language-vector mode '" + text +
                    "' (expected none, lang-id, word-order or full-wals)");
}

std::string to_string(BlockDropoutVariant variant) {
  return variant == BlockDropoutVariant::kVerbatim ? "verbatim" : "normalized";
}

BlockDropoutVariant parse_block_dropout_variant(const std::string& text) {
  if (text == "verbatim") return BlockDropoutVariant::kVerbatim;
  if (text == "normalized") return BlockDropoutVariant::kNormalized;
  throw ConfigError("unknown block-dropout variant '" + text + "' (expected verbatim or normalized)");
}

namespace {

// Per-feature sorted value domains over the whole table.
std::map<std::string, std::vector<std::string>> feature_domains(const WalsTable& wals) {
  std::map<std::string, std::set<std::string>> values;
  for (const auto& [lang, row] : wals.languages) {
    for (const auto& [feature, value] : row.features) values[feature].insert(value);
  }
  std::map<std::string, std::vector<std::string>> domains;
  for (auto& [feature, set] : values) domains[feature] = {set.begin(), set.end()};
  return domains;
}

Eigen::VectorXd one_hot(const std::vector<std::string>& domain, const std::string& value) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size()));
  auto it = std::find(domain.begin(), domain.end(), value);
  if (it != domain.end()) v(it - domain.begin()) = 1.0;
  return v;
}

// Encoding of `feature` for `language`: its own one-hot, else the mean over
// genus-mates that have it, else the mean over every language that has it.
Eigen::VectorXd feature_encoding(const WalsTable& wals, const std::string& language,
                                 const std::string& feature,
                                 const std::vector<std::string>& domain) {
  const auto& row = wals.languages.at(language);
  if (auto it = row.features.find(feature); it != row.features.end()) {
    return one_hot(domain, it->second);
  }
  for (bool same_genus : {true, false}) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size()));
    int count = 0;
    for (const auto& [other, other_row] : wals.languages) {
      if (same_genus && other_row.genus != row.genus) continue;
      auto it = other_row.features.find(feature);
      if (it == other_row.features.end()) continue;
      total += one_hot(domain, it->second);
      ++count;
    }
    if (count > 0) return total / count;
  }
  return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size()));
}

}  // namespace

LanguageVector language_vector(const std::string& language, LanguageVectorMode mode,
                               const SymbolTable& languages, const WalsTable* wals) {
  LanguageVector result;
  result.mode = mode;
  switch (mode) {
    case LanguageVectorMode::kNone:
      result.values = Eigen::VectorXd(0);
      return result;
    case LanguageVectorMode::kLangId: {
      const int id = languages.lookup(language);
      if (id == SymbolTable::kUnk) throw Error("unknown language '" + language + "'");
      result.values = Eigen::VectorXd::Zero(languages.count());
      result.values(id - 1) = 1.0;
      return result;
    }
    case LanguageVectorMode::kWordOrder:
    case LanguageVectorMode::kFullWals:
      break;
  }
  if (!wals) throw Error("language-vector mode " + to_string(mode) + " needs a WALS table");
  if (!wals->languages.count(language)) {
    throw Error("WALS table has no row for language '" + language + "'");
  }
  const auto domains = feature_domains(*wals);
  std::vector<Eigen::VectorXd> parts;
  if (mode == LanguageVectorMode::kWordOrder) {
    for (const auto& feature : kWordOrderFeatures) {
      auto it = domains.find(feature);
      if (it == domains.end()) throw Error("WALS table lacks word-order feature " + feature);
      parts.push_back(feature_encoding(*wals, language, feature, it->second));
    }
  } else {
    for (const auto& [feature, domain] : domains) {
      parts.push_back(feature_encoding(*wals, language, feature, domain));
    }
  }
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  result.values.resize(total);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    result.values.segment(offset, p.size()) = p;
    offset += p.size();
  }
  if (mode == LanguageVectorMode::kFullWals) {
    result.values = (2.0 * result.values.array() - 1.0).matrix();
  }
  return result;
}

Eigen::MatrixXd language_vector_matrix(LanguageVectorMode mode, const SymbolTable& languages,
                                       const WalsTable* wals) {
  if (mode == LanguageVectorMode::kNone) return Eigen::MatrixXd(0, languages.id_space());
  Eigen::MatrixXd m;
  for (int id = 1; id <= languages.count(); ++id) {
    auto v = language_vector(languages.symbol(id), mode, languages, wals).values;
    if (m.size() == 0) m = Eigen::MatrixXd::Zero(v.size(), languages.id_space());
    m.col(id) = v;
  }
  return m;
}

void DropoutState::update_mu(double dev_accuracy) { mu = std::clamp(1.0 - dev_accuracy, 0.0, 1.0); }

template <typename Scalar>
ad::Expr<Scalar> block_dropout(ad::Expr<Scalar> e, double mu, bool training,
                               BlockDropoutVariant variant, ad::Rng& rng) {
  if (mu < 0 || mu > 1) throw Error("block dropout rate must lie in [0, 1]");
  if (!training || mu == 0) return e;
  const bool dropped = std::bernoulli_distribution(mu)(rng);
  if (dropped) return ad::scale(e, Scalar(0));
  const double keep_scale = variant == BlockDropoutVariant::kVerbatim ? 1.0 / mu : 1.0 / (1.0 - mu);
  return ad::scale(e, static_cast<Scalar>(keep_scale));
}

template <typename Scalar>
Representations<Scalar>::Representations(ad::ParameterStore<Scalar>& store,
                                         const ModelConfig& config, const Vocabulary& vocab,
                                         const LexicalResources& resources,
                                         const Eigen::MatrixXd& language_vectors)
    : config_(&config) {
  const auto& d = config.dims;
  if (config.lexical) {
    if (!resources.has_pretrained()) {
      throw ConfigError("lexical features need pretrained embeddings");
    }
    pretrained_ = &store.add_fixed("pretrained", resources.pretrained.vectors.template cast<Scalar>());
    pretrained_unk_ = &store.add("pretrained_unk", resources.pretrained.dim, 1);
    word_ = &store.add_lookup("word_embeddings", d.word, vocab.words.id_space());
    if (vocab.clusters.count() > 0) {
      cluster_ = &store.add_lookup("cluster_embeddings", d.cluster, vocab.clusters.id_space());
    }
  }
  upos_ = &store.add_lookup("upos_embeddings", d.upos, vocab.upos.id_space());
  if (config.fine_pos && !config.joint_tagging) {
    xpos_ = &store.add_lookup("xpos_embeddings", d.xpos, vocab.xpos.id_space());
  }
  if (config.language_vector != LanguageVectorMode::kNone) {
    if (language_vectors.cols() != vocab.languages.id_space() || language_vectors.rows() == 0) {
      throw ConfigError("language vectors do not match the language vocabulary");
    }
    language_vectors_ = &store.add_fixed("language_vectors", language_vectors.template cast<Scalar>());
    language_l_ = &store.add("language_L", d.language, language_vectors.rows());
    language_bias_ = &store.add("language_L_bias", d.language, 1);
  }
}

template <typename Scalar>
int Representations<Scalar>::language_dim() const {
  return language_l_ ? config_->dims.language : 0;
}

template <typename Scalar>
int Representations<Scalar>::parse_dim() const {
  const auto& d = config_->dims;
  int dim = d.upos + language_dim();
  if (pretrained_) dim += static_cast<int>(pretrained_->value.rows());
  if (word_) dim += d.word;
  if (cluster_) dim += d.cluster;
  if (xpos_) dim += d.xpos;
  return dim;
}

template <typename Scalar>
int Representations<Scalar>::tag_dim() const {
  int dim = language_dim();
  if (pretrained_) dim += static_cast<int>(pretrained_->value.rows());
  if (cluster_) dim += config_->dims.cluster;
  return dim;
}

template <typename Scalar>
ad::Expr<Scalar> Representations<Scalar>::language_embedding(ad::Graph<Scalar>& g,
                                                             int language_id) const {
  if (!language_l_) throw Error("language embeddings are disabled in this model");
  if (language_id <= SymbolTable::kUnk || language_id >= language_vectors_->value.cols()) {
    throw Error("unknown language id " + std::to_string(language_id));
  }
  auto l = g.const_lookup(*language_vectors_, language_id);
  return ad::tanh(ad::affine(g.parameter(*language_bias_), {{g.parameter(*language_l_), l}}));
}

template <typename Scalar>
ad::Expr<Scalar> Representations<Scalar>::token_rep_parse(ad::Graph<Scalar>& g,
                                                          const EncodedToken& token,
                                                          ad::Expr<Scalar> language,
                                                          DropoutState& dropout,
                                                          int predicted_upos) const {
  std::vector<ad::Expr<Scalar>> slices;
  if (pretrained_) {
    slices.push_back(token.pretrained >= 0 ? g.const_lookup(*pretrained_, token.pretrained)
                                           : g.parameter(*pretrained_unk_));
  }
  if (word_) {
    int word = token.word;
    if (dropout.training && token.singleton && dropout.rng && dropout.unk_prob > 0 &&
        std::bernoulli_distribution(dropout.unk_prob)(*dropout.rng)) {
      word = SymbolTable::kUnk;
    }
    slices.push_back(g.lookup(*word_, word));
  }
  if (cluster_) slices.push_back(g.lookup(*cluster_, token.cluster));
  if (predicted_upos >= 0) {
    auto e = g.lookup(*upos_, predicted_upos);
    if (dropout.training) {
      if (!dropout.rng) throw Error("training-mode block dropout needs a random source");
      e = block_dropout(e, dropout.mu, true, dropout.variant, *dropout.rng);
    }
    slices.push_back(e);
  } else {
    slices.push_back(g.lookup(*upos_, token.upos));
    if (xpos_) {
      auto e = g.lookup(*xpos_, token.xpos);
      if (dropout.training && dropout.rng && dropout.fine_pos_rate > 0 &&
          std::bernoulli_distribution(dropout.fine_pos_rate)(*dropout.rng)) {
        e = ad::scale(e, Scalar(0));
      }
      slices.push_back(e);
    }
  }
  if (language_l_) slices.push_back(language);
  return slices.size() == 1 ? slices.front() : ad::concat(slices);
}

template <typename Scalar>
ad::Expr<Scalar> Representations<Scalar>::token_rep_tag(ad::Graph<Scalar>& g,
                                                        const EncodedToken& token,
                                                        ad::Expr<Scalar> language) const {
  std::vector<ad::Expr<Scalar>> slices;
  if (pretrained_) {
    slices.push_back(token.pretrained >= 0 ? g.const_lookup(*pretrained_, token.pretrained)
                                           : g.parameter(*pretrained_unk_));
  }
  if (cluster_) slices.push_back(g.lookup(*cluster_, token.cluster));
  if (language_l_) slices.push_back(language);
  if (slices.empty()) throw ConfigError("tagging needs lexical features or language embeddings");
  return slices.size() == 1 ? slices.front() : ad::concat(slices);
}

template ad::Expr<float> block_dropout<float>(ad::Expr<float>, double, bool, BlockDropoutVariant,
                                              ad::Rng&);
template ad::Expr<double> block_dropout<double>(ad::Expr<double>, double, bool,
                                                BlockDropoutVariant, ad::Rng&);
template class Representations<float>;
template class Representations<double>;

}  // namespace polyparse
