#pragma once

#include <string>
#include <vector>

#include "polyparse/autodiff.hpp"

namespace polyparse::ad {

template <typename Scalar>
struct LstmState {
  std::vector<Expr<Scalar>> h;  // one per layer
  std::vector<Expr<Scalar>> c;

  Expr<Scalar> output() const { return h.back(); }
};

// Multi-layer LSTM with input, forget and output gates. Gate weights of a
// layer are stacked as [input; forget; output; candidate].
template <typename Scalar>
class Lstm {
 public:
  Lstm() = default;
  Lstm(ParameterStore<Scalar>& store, const std::string& prefix, int layers, int input_dim,
       int hidden_dim, bool learned_initial_state);

  LstmState<Scalar> initial_state(Graph<Scalar>& g) const;
  LstmState<Scalar> step(const LstmState<Scalar>& state, Expr<Scalar> input) const;

  int layers() const { return static_cast<int>(layers_.size()); }
  int input_dim() const { return input_dim_; }
  int hidden_dim() const { return hidden_dim_; }

 private:
  struct Layer {
    Parameter<Scalar>* wx = nullptr;
    Parameter<Scalar>* wh = nullptr;
    Parameter<Scalar>* bias = nullptr;
    Parameter<Scalar>* h0 = nullptr;
    Parameter<Scalar>* c0 = nullptr;
  };
  std::vector<Layer> layers_;
  int input_dim_ = 0;
  int hidden_dim_ = 0;
};

// LSTM over a stack: push runs one step from the current top state, pop
// restores the previous snapshot. Summary of the empty stack is the learned
// initial hidden state of the top layer.
template <typename Scalar>
class StackLstm {
 public:
  StackLstm(const Lstm<Scalar>& lstm, Graph<Scalar>& g);

  void push(Expr<Scalar> input);
  void pop();
  Expr<Scalar> summary() const { return states_.back().output(); }
  std::size_t size() const { return states_.size() - 1; }
  bool empty() const { return size() == 0; }

 private:
  const Lstm<Scalar>* lstm_;
  std::vector<LstmState<Scalar>> states_;
};

// Per-position [forward; backward] hidden states.
template <typename Scalar>
std::vector<Expr<Scalar>> bilstm(const Lstm<Scalar>& forward, const Lstm<Scalar>& backward,
                                 Graph<Scalar>& g, const std::vector<Expr<Scalar>>& inputs);

}  // namespace polyparse::ad
