#include "polyparse/parser_model.hpp"

#include <cmath>

#include "polyparse/error.hpp"

namespace polyparse {

template <typename Scalar>
ParserNetwork<Scalar>::ParserNetwork(ad::ParameterStore<Scalar>& store, const ModelDims& dims,
                                     int token_dim, int language_dim, int label_count)
    : inventory_(label_count),
      language_dim_(language_dim),
      stack_lstm_(store, "parser.stack", dims.layers, token_dim, dims.hidden, true),
      buffer_lstm_(store, "parser.buffer", dims.layers, token_dim, dims.hidden, true),
      action_lstm_(store, "parser.actions", dims.layers, dims.action + language_dim, dims.hidden,
                   true) {
  const int actions = inventory_.size();
  root_ = &store.add("parser.root", token_dim, 1);
  action_embeddings_ = &store.add_lookup("parser.action_embeddings", dims.action, actions);
  relation_embeddings_ =
      &store.add_lookup("parser.relation_embeddings", dims.relation, label_count + 1);
  w_ = &store.add("parser.W", dims.state, state_input_dim());
  w_bias_ = &store.add("parser.W_bias", dims.state, 1, ad::Init::kZero);
  g_ = &store.add("parser.g", actions, dims.state);
  q_ = &store.add("parser.q", actions, 1, ad::Init::kZero);
  u_ = &store.add("parser.U", token_dim, 2 * token_dim + dims.relation);
  u_bias_ = &store.add("parser.U_bias", token_dim, 1, ad::Init::kZero);
}

template <typename Scalar>
int ParserNetwork<Scalar>::state_input_dim() const {
  return stack_lstm_.hidden_dim() + buffer_lstm_.hidden_dim() + action_lstm_.hidden_dim() +
         language_dim_;
}

template <typename Scalar>
ad::Expr<Scalar> ParserNetwork<Scalar>::state(ad::Graph<Scalar>& g, ad::Expr<Scalar> stack,
                                              ad::Expr<Scalar> buffer, ad::Expr<Scalar> history,
                                              ad::Expr<Scalar> language) const {
  std::vector<ad::Expr<Scalar>> parts{stack, buffer, history};
  if (language_dim_ > 0) parts.push_back(language);
  auto x = ad::concat(parts);
  return ad::rectify(ad::affine(g.parameter(*w_bias_), {{g.parameter(*w_), x}}));
}

template <typename Scalar>
ad::Expr<Scalar> ParserNetwork<Scalar>::action_scores(ad::Graph<Scalar>& g,
                                                      ad::Expr<Scalar> state) const {
  return ad::affine(g.parameter(*q_), {{g.parameter(*g_), state}});
}

template <typename Scalar>
ad::Expr<Scalar> ParserNetwork<Scalar>::compose(ad::Graph<Scalar>& g, ad::Expr<Scalar> head,
                                                ad::Expr<Scalar> dependent, int label) const {
  auto x = ad::concat(std::vector<ad::Expr<Scalar>>{head, dependent,
                                                    g.lookup(*relation_embeddings_, label)});
  return ad::tanh(ad::affine(g.parameter(*u_bias_), {{g.parameter(*u_), x}}));
}

template <typename Scalar>
std::vector<bool> ParserNetwork<Scalar>::legal_mask(const ParserConfiguration& config) const {
  const LegalKinds legal = legal_actions(config);
  std::vector<bool> mask(inventory_.size());
  for (int id = 0; id < inventory_.size(); ++id) mask[id] = legal.allows(inventory_[id].kind);
  return mask;
}

template <typename Scalar>
ParseRun<Scalar> ParserNetwork<Scalar>::run(ad::Graph<Scalar>& g,
                                            const std::vector<ad::Expr<Scalar>>& tokens,
                                            ad::Expr<Scalar> language,
                                            const std::vector<Action>* gold) const {
  const int n = static_cast<int>(tokens.size());
  if (language_dim_ > 0 && !language) throw Error("parser expects a language embedding");
  ParseRun<Scalar> result;
  ParserConfiguration config = initial_configuration(n);

  ad::StackLstm<Scalar> stack(stack_lstm_, g);
  ad::StackLstm<Scalar> buffer(buffer_lstm_, g);
  ad::StackLstm<Scalar> history(action_lstm_, g);
  // Representations of the stack items, parallel to config.stack.
  std::vector<ad::Expr<Scalar>> stack_items{g.parameter(*root_)};
  stack.push(stack_items.back());
  for (int i = n - 1; i >= 0; --i) buffer.push(tokens[i]);

  std::vector<ad::Expr<Scalar>> losses;
  const std::size_t steps = 2 * static_cast<std::size_t>(n);
  for (std::size_t step = 0; step < steps; ++step) {
    auto mask = legal_mask(config);
    auto p = state(g, stack.summary(), buffer.summary(), history.summary(), language);
    auto scores = action_scores(g, p);
    auto probs = ad::masked_softmax<Scalar>(scores.value(), mask);

    int chosen = -1;
    if (gold) {
      if (step >= gold->size()) throw StructureError("gold action sequence is too short");
      chosen = inventory_.id((*gold)[step]);
      if (!mask[chosen]) {
        throw StructureError("gold action " + to_string((*gold)[step]) + " is illegal at step " +
                             std::to_string(step));
      }
      losses.push_back(ad::softmax_cross_entropy(scores, chosen, mask));
    } else {
      for (int id = 0; id < inventory_.size(); ++id) {
        if (mask[id] && (chosen < 0 || probs(id) > probs(chosen))) chosen = id;
      }
    }
    const Action action = inventory_[chosen];
    result.actions.push_back(action);
    result.log_probs.push_back(std::log(static_cast<double>(probs(chosen))));

    if (action.kind == ActionKind::kShift) {
      stack_items.push_back(tokens[config.buffer.front() - 1]);
      buffer.pop();
      stack.push(stack_items.back());
    } else {
      const std::size_t top = stack_items.size() - 1;
      auto u = stack_items[top - 1];
      auto v = stack_items[top];
      const bool right = action.kind == ActionKind::kReduceRight;
      stack.pop();
      stack.pop();
      stack_items.pop_back();
      stack_items.pop_back();
      const bool root_attach = right && config.stack[top - 1] == 0;
      auto composed = root_attach ? u : (right ? compose(g, u, v, action.label)
                                               : compose(g, v, u, action.label));
      stack_items.push_back(composed);
      stack.push(composed);
    }
    apply_in_place(config, action);

    auto a = g.lookup(*action_embeddings_, chosen);
    if (language_dim_ > 0) a = ad::concat(std::vector<ad::Expr<Scalar>>{a, language});
    history.push(a);
  }
  if (!config.is_terminal()) throw StructureError("parse did not reach the terminal configuration");
  if (gold) result.loss = ad::sum(losses);
  result.tree = tree_from_arcs(config.arcs, n);
  return result;
}

template class ParserNetwork<float>;
template class ParserNetwork<double>;

}  // namespace polyparse
