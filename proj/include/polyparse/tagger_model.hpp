#pragma once

#include <vector>

#include "polyparse/autodiff.hpp"
#include "polyparse/lstm.hpp"
#include "polyparse/representations.hpp"

namespace polyparse {

// BiLSTM coarse-POS tagger: tanh input projection, bidirectional LSTM, then a
// per-position softmax over the coarse tag ids. The UNK tag is never
// predicted.
template <typename Scalar>
class TaggerNetwork {
 public:
  TaggerNetwork(ad::ParameterStore<Scalar>& store, const ModelDims& dims, int input_dim,
                int tag_space);

  int tag_space() const { return tag_space_; }
  const std::vector<bool>& mask() const { return mask_; }

  // Unnormalized tag scores per position.
  std::vector<ad::Expr<Scalar>> scores(ad::Graph<Scalar>& g,
                                       const std::vector<ad::Expr<Scalar>>& inputs) const;

  // Per-position distributions over tag ids (UNK has probability 0).
  std::vector<ad::Vector<Scalar>> distributions(const std::vector<ad::Expr<Scalar>>& scores) const;

  // Argmax tag ids, ties to the smallest id.
  std::vector<int> argmax(const std::vector<ad::Expr<Scalar>>& scores) const;

  // Sum of per-position cross-entropies. Positions whose gold tag is UNK are
  // skipped.
  ad::Expr<Scalar> loss(ad::Graph<Scalar>& g, const std::vector<ad::Expr<Scalar>>& scores,
                        const std::vector<int>& gold) const;

 private:
  int tag_space_;
  std::vector<bool> mask_;
  ad::Parameter<Scalar>* input_;
  ad::Parameter<Scalar>* input_bias_;
  ad::Lstm<Scalar> forward_;
  ad::Lstm<Scalar> backward_;
  ad::Parameter<Scalar>* output_;
  ad::Parameter<Scalar>* output_bias_;
};

}  // namespace polyparse
