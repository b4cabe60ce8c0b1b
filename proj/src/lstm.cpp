#include "polyparse/lstm.hpp"

#include "polyparse/error.hpp"

namespace polyparse::ad {

template <typename Scalar>
Lstm<Scalar>::Lstm(ParameterStore<Scalar>& store, const std::string& prefix, int layers,
                   int input_dim, int hidden_dim, bool learned_initial_state)
    : input_dim_(input_dim), hidden_dim_(hidden_dim) {
  if (layers < 1 || input_dim < 1 || hidden_dim < 1) throw Error("invalid LSTM dimensions");
  for (int l = 0; l < layers; ++l) {
    const std::string name = prefix + ".l" + std::to_string(l);
    const int in = l == 0 ? input_dim : hidden_dim;
    Layer layer;
    layer.wx = &store.add(name + ".wx", 4 * hidden_dim, in);
    layer.wh = &store.add(name + ".wh", 4 * hidden_dim, hidden_dim);
    layer.bias = &store.add(name + ".b", 4 * hidden_dim, 1, Init::kZero);
    if (learned_initial_state) {
      layer.h0 = &store.add(name + ".h0", hidden_dim, 1);
      layer.c0 = &store.add(name + ".c0", hidden_dim, 1);
    }
    layers_.push_back(layer);
  }
}

template <typename Scalar>
LstmState<Scalar> Lstm<Scalar>::initial_state(Graph<Scalar>& g) const {
  LstmState<Scalar> state;
  for (const auto& layer : layers_) {
    if (layer.h0) {
      state.h.push_back(g.parameter(*layer.h0));
      state.c.push_back(g.parameter(*layer.c0));
    } else {
      state.h.push_back(g.zeros(hidden_dim_));
      state.c.push_back(g.zeros(hidden_dim_));
    }
  }
  return state;
}

template <typename Scalar>
LstmState<Scalar> Lstm<Scalar>::step(const LstmState<Scalar>& state, Expr<Scalar> input) const {
  if (input.rows() != input_dim_) {
    throw Error("LSTM input has " + std::to_string(input.rows()) + " rows, expected " +
                std::to_string(input_dim_));
  }
  auto& g = *input.graph;
  const Index H = hidden_dim_;
  LstmState<Scalar> next;
  Expr<Scalar> x = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    auto gates = affine(g.parameter(*layer.bias), {{g.parameter(*layer.wx), x},
                                                   {g.parameter(*layer.wh), state.h[l]}});
    auto in_gate = logistic(rows(gates, 0, H));
    auto forget_gate = logistic(rows(gates, H, H));
    auto out_gate = logistic(rows(gates, 2 * H, H));
    auto candidate = tanh(rows(gates, 3 * H, H));
    auto c = cwise_product(forget_gate, state.c[l]) + cwise_product(in_gate, candidate);
    auto h = cwise_product(out_gate, tanh(c));
    next.h.push_back(h);
    next.c.push_back(c);
    x = h;
  }
  return next;
}

template <typename Scalar>
StackLstm<Scalar>::StackLstm(const Lstm<Scalar>& lstm, Graph<Scalar>& g) : lstm_(&lstm) {
  states_.push_back(lstm.initial_state(g));
}

template <typename Scalar>
void StackLstm<Scalar>::push(Expr<Scalar> input) {
  states_.push_back(lstm_->step(states_.back(), input));
}

template <typename Scalar>
void StackLstm<Scalar>::pop() {
  if (empty()) throw Error("pop from an empty stack LSTM");
  states_.pop_back();
}

template <typename Scalar>
std::vector<Expr<Scalar>> bilstm(const Lstm<Scalar>& forward, const Lstm<Scalar>& backward,
                                 Graph<Scalar>& g, const std::vector<Expr<Scalar>>& inputs) {
  const std::size_t n = inputs.size();
  std::vector<Expr<Scalar>> fw(n), bw(n);
  auto state = forward.initial_state(g);
  for (std::size_t i = 0; i < n; ++i) {
    state = forward.step(state, inputs[i]);
    fw[i] = state.output();
  }
  state = backward.initial_state(g);
  for (std::size_t i = n; i-- > 0;) {
    state = backward.step(state, inputs[i]);
    bw[i] = state.output();
  }
  std::vector<Expr<Scalar>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(concat<Scalar>({fw[i], bw[i]}));
  return out;
}

template class Lstm<float>;
template class Lstm<double>;
template class StackLstm<float>;
template class StackLstm<double>;
template std::vector<Expr<float>> bilstm<float>(const Lstm<float>&, const Lstm<float>&,
                                                Graph<float>&, const std::vector<Expr<float>>&);
template std::vector<Expr<double>> bilstm<double>(const Lstm<double>&, const Lstm<double>&,
                                                  Graph<double>&, const std::vector<Expr<double>>&);

}  // namespace polyparse::ad
