#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "polyparse/autodiff.hpp"
#include "polyparse/parser_model.hpp"
#include "polyparse/representations.hpp"
#include "polyparse/tagger_model.hpp"
#include "polyparse/treebank.hpp"
#include "polyparse/tree.hpp"
#include "polyparse/vocabulary.hpp"

namespace polyparse {

struct EncodedSentence {
  std::vector<EncodedToken> tokens;
  int language = SymbolTable::kUnk;
  DependencyTree gold;               // original (possibly nonprojective) gold tree
  std::vector<Action> gold_actions;  // oracle over the projectivized gold tree
  std::vector<int> gold_upos;
  std::size_t size() const { return tokens.size(); }
};

struct LossParts {
  double tagging = 0;
  double parsing = 0;
};

struct ParseOutput {
  DependencyTree tree;
  std::vector<int> tags;  // predicted coarse tags; empty without joint tagging
  std::vector<Action> actions;
  std::vector<double> log_probs;
};

// The complete parser: vocabulary, fixed lexical resources, parameters, and
// the parser and tagger networks built over one shared parameter store.
template <typename Scalar>
class Model {
 public:
  Model(ModelConfig config, Vocabulary vocab, LexicalResources resources,
        Eigen::MatrixXd language_vectors);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  void initialize(ad::Rng& rng) { store_.initialize(rng); }

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const LexicalResources& resources() const { return resources_; }
  ad::ParameterStore<Scalar>& store() { return store_; }
  const ad::ParameterStore<Scalar>& store() const { return store_; }
  const Representations<Scalar>& representations() const { return *reps_; }
  const ParserNetwork<Scalar>& parser() const { return *parser_; }
  const TaggerNetwork<Scalar>* tagger() const { return tagger_.get(); }

  // Throws when the sentence's language is unknown to the model.
  // `with_oracle` requires gold heads and computes the training targets.
  EncodedSentence encode(const Sentence& sentence, bool with_oracle) const;

  // Builds the training loss (tagging + parsing) on `g`. `parts` receives
  // the two components when given.
  ad::Expr<Scalar> loss(ad::Graph<Scalar>& g, const EncodedSentence& sentence,
                        DropoutState& dropout, LossParts* parts = nullptr) const;

  // Deterministic greedy decoding; safe to call from several threads.
  ParseOutput parse(const EncodedSentence& sentence) const;
  std::vector<int> predict_tags(const EncodedSentence& sentence) const;

  // Copies `output` into the sentence's HEAD/DEPREL (and UPOS when tags were
  // predicted).
  Sentence annotate(const Sentence& sentence, const ParseOutput& output) const;

  std::vector<std::string> languages() const;

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static std::unique_ptr<Model> load(std::istream& in);
  static std::unique_ptr<Model> load_file(const std::string& path);

 private:
  std::vector<ad::Expr<Scalar>> tag_inputs(ad::Graph<Scalar>& g, const EncodedSentence& s,
                                           ad::Expr<Scalar> language) const;
  ad::Expr<Scalar> language_expr(ad::Graph<Scalar>& g, const EncodedSentence& s) const;

  ModelConfig config_;
  Vocabulary vocab_;
  LexicalResources resources_;
  ad::ParameterStore<Scalar> store_;
  std::unique_ptr<Representations<Scalar>> reps_;
  std::unique_ptr<ParserNetwork<Scalar>> parser_;
  std::unique_ptr<TaggerNetwork<Scalar>> tagger_;
};

// Registers every cluster id of `clusters` in the vocabulary, in word order.
void add_clusters(Vocabulary& vocab, const ClusterMap& clusters);

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);

}  // namespace polyparse
