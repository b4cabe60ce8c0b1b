#pragma once

#include <vector>

#include "polyparse/autodiff.hpp"
#include "polyparse/lstm.hpp"
#include "polyparse/representations.hpp"
#include "polyparse/transitions.hpp"

namespace polyparse {

template <typename Scalar>
struct ParseRun {
  ad::Expr<Scalar> loss;  // set only when gold actions were supplied
  std::vector<Action> actions;
  std::vector<double> log_probs;
  DependencyTree tree;
};

// Stack-LSTM parser over arc-standard transitions. The parser state is
// p = max{0, W [s; b; a; l'] + W_bias}; action z scores g_z . p + q_z.
template <typename Scalar>
class ParserNetwork {
 public:
  ParserNetwork(ad::ParameterStore<Scalar>& store, const ModelDims& dims, int token_dim,
                int language_dim, int label_count);

  const ActionInventory& actions() const { return inventory_; }
  int state_input_dim() const;

  // `language` may be empty when language embeddings are off. With `gold`
  // the run is teacher-forced and accumulates the cross-entropy of every
  // gold action; without it the argmax legal action is taken (smallest id on
  // ties).
  ParseRun<Scalar> run(ad::Graph<Scalar>& g, const std::vector<ad::Expr<Scalar>>& tokens,
                       ad::Expr<Scalar> language, const std::vector<Action>* gold = nullptr) const;

  // Parser state for the given summaries.
  ad::Expr<Scalar> state(ad::Graph<Scalar>& g, ad::Expr<Scalar> stack, ad::Expr<Scalar> buffer,
                         ad::Expr<Scalar> history, ad::Expr<Scalar> language) const;
  ad::Expr<Scalar> action_scores(ad::Graph<Scalar>& g, ad::Expr<Scalar> state) const;
  ad::Expr<Scalar> compose(ad::Graph<Scalar>& g, ad::Expr<Scalar> head, ad::Expr<Scalar> dependent,
                           int label) const;

  // Legal action ids as a softmax mask.
  std::vector<bool> legal_mask(const ParserConfiguration& config) const;

 private:
  ActionInventory inventory_;
  int language_dim_;
  ad::Lstm<Scalar> stack_lstm_;
  ad::Lstm<Scalar> buffer_lstm_;
  ad::Lstm<Scalar> action_lstm_;
  ad::Parameter<Scalar>* root_;
  ad::Parameter<Scalar>* action_embeddings_;
  ad::Parameter<Scalar>* relation_embeddings_;
  ad::Parameter<Scalar>* w_;
  ad::Parameter<Scalar>* w_bias_;
  ad::Parameter<Scalar>* g_;
  ad::Parameter<Scalar>* q_;
  ad::Parameter<Scalar>* u_;
  ad::Parameter<Scalar>* u_bias_;
};

}  // namespace polyparse
