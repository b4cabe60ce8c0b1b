#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyparse/autodiff.hpp"
#include "polyparse/lexicon.hpp"
#include "polyparse/vocabulary.hpp"

namespace polyparse {

enum class LanguageVectorMode { kNone, kLangId, kWordOrder, kFullWals };
enum class BlockDropoutVariant { kVerbatim, kNormalized };

std::string to_string(LanguageVectorMode mode);
LanguageVectorMode parse_language_vector_mode(const std::string& text);
std::string to_string(BlockDropoutVariant variant);
BlockDropoutVariant parse_block_dropout_variant(const std::string& text);

// WALS word-order features: subject/verb, object/verb, adposition/NP,
// genitive/noun, adjective/noun.
inline const std::array<std::string, 5> kWordOrderFeatures = {"82A", "83A", "85A", "86A", "87A"};

struct LanguageVector {
  LanguageVectorMode mode = LanguageVectorMode::kNone;
  Eigen::VectorXd values;
};

// LANG_ID: one-hot over the observed languages (index = id - 1).
// WORD_ORDER: concatenated one-hots of the five word-order features.
// FULL_WALS: averaged one-hots of every feature in the table, rescaled to
// [-1, 1]. Features a language lacks are filled with the mean encoding of its
// genus (or of all languages when no genus-mate has the feature).
LanguageVector language_vector(const std::string& language, LanguageVectorMode mode,
                               const SymbolTable& languages, const WalsTable* wals);

// Columns indexed by language id; column 0 (UNK) is zero.
Eigen::MatrixXd language_vector_matrix(LanguageVectorMode mode, const SymbolTable& languages,
                                       const WalsTable* wals);

struct ModelDims {
  int word = 50;
  int cluster = 12;
  int upos = 12;
  int xpos = 12;
  int language = 12;
  int hidden = 100;
  int state = 100;
  int action = 16;
  int relation = 20;
  int layers = 2;
  int tagger_input = 60;
  int tagger_hidden = 60;
  int tagger_layers = 1;
};

struct ModelConfig {
  bool lexical = false;
  LanguageVectorMode language_vector = LanguageVectorMode::kNone;
  bool fine_pos = false;
  bool joint_tagging = false;
  BlockDropoutVariant block_dropout = BlockDropoutVariant::kVerbatim;
  ModelDims dims;
  double unk_prob = 0.25;
  double fine_pos_dropout = 0.5;
};

// Stochastic state consulted while building a training graph.
struct DropoutState {
  bool training = false;
  double mu = 1.0;  // block-dropout rate for predicted POS embeddings
  double fine_pos_rate = 0.5;
  double unk_prob = 0.25;
  BlockDropoutVariant variant = BlockDropoutVariant::kVerbatim;
  ad::Rng* rng = nullptr;

  // mu follows the tagger's development error rate.
  void update_mu(double dev_accuracy);
};

// Training: e' = (1 - b) / mu * e with b ~ Bernoulli(mu) (verbatim), or
// (1 - b) / (1 - mu) * e (normalized). mu = 0 disables dropout. Test time
// returns e unchanged.
template <typename Scalar>
ad::Expr<Scalar> block_dropout(ad::Expr<Scalar> e, double mu, bool training,
                               BlockDropoutVariant variant, ad::Rng& rng);

struct LexicalResources {
  EmbeddingTable pretrained;  // fixed inputs, never trained
  ClusterMap clusters;

  bool has_pretrained() const { return pretrained.size() > 0; }
  bool has_clusters() const { return !clusters.cluster_of.empty(); }
};

struct EncodedToken {
  int word = SymbolTable::kUnk;
  bool singleton = false;
  int pretrained = -1;  // column in the pretrained table, -1 = UNK vector
  int cluster = SymbolTable::kUnk;
  int upos = SymbolTable::kUnk;
  int xpos = SymbolTable::kUnk;
};

// Trainable and fixed tables behind the token representations. Pretrained,
// cluster and language tables are single tensors used by both the parser
// and the tagger.
template <typename Scalar>
class Representations {
 public:
  Representations(ad::ParameterStore<Scalar>& store, const ModelConfig& config,
                  const Vocabulary& vocab, const LexicalResources& resources,
                  const Eigen::MatrixXd& language_vectors);

  bool uses_pretrained() const { return pretrained_ != nullptr; }
  bool uses_words() const { return word_ != nullptr; }
  bool uses_clusters() const { return cluster_ != nullptr; }
  bool uses_fine_pos() const { return xpos_ != nullptr; }
  bool uses_language() const { return language_l_ != nullptr; }

  int parse_dim() const;
  int tag_dim() const;
  int language_dim() const;

  // l' = tanh(L l + L_bias)
  ad::Expr<Scalar> language_embedding(ad::Graph<Scalar>& g, int language_id) const;

  // `predicted_upos` >= 0 selects the predicted-tag path (block dropout, no
  // fine POS slice). `language` is ignored when language embeddings are off.
  ad::Expr<Scalar> token_rep_parse(ad::Graph<Scalar>& g, const EncodedToken& token,
                                   ad::Expr<Scalar> language, DropoutState& dropout,
                                   int predicted_upos = -1) const;
  ad::Expr<Scalar> token_rep_tag(ad::Graph<Scalar>& g, const EncodedToken& token,
                                 ad::Expr<Scalar> language) const;

  ad::Parameter<Scalar>* pretrained() const { return pretrained_; }
  ad::Parameter<Scalar>* clusters() const { return cluster_; }
  ad::Parameter<Scalar>* language_matrix() const { return language_l_; }

 private:
  const ModelConfig* config_;
  ad::Parameter<Scalar>* pretrained_ = nullptr;
  ad::Parameter<Scalar>* pretrained_unk_ = nullptr;
  ad::Parameter<Scalar>* word_ = nullptr;
  ad::Parameter<Scalar>* cluster_ = nullptr;
  ad::Parameter<Scalar>* upos_ = nullptr;
  ad::Parameter<Scalar>* xpos_ = nullptr;
  ad::Parameter<Scalar>* language_vectors_ = nullptr;
  ad::Parameter<Scalar>* language_l_ = nullptr;
  ad::Parameter<Scalar>* language_bias_ = nullptr;
};

}  // namespace polyparse
