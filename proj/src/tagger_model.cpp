#include "polyparse/tagger_model.hpp"

#include "polyparse/error.hpp"
#include "polyparse/vocabulary.hpp"

namespace polyparse {

template <typename Scalar>
TaggerNetwork<Scalar>::TaggerNetwork(ad::ParameterStore<Scalar>& store, const ModelDims& dims,
                                     int input_dim, int tag_space)
    : tag_space_(tag_space), mask_(tag_space, true) {
  if (tag_space < 2) throw ConfigError("joint tagging needs at least one coarse tag");
  mask_[SymbolTable::kUnk] = false;
  input_ = &store.add("tagger.input", dims.tagger_input, input_dim);
  input_bias_ = &store.add("tagger.input_bias", dims.tagger_input, 1, ad::Init::kZero);
  forward_ = ad::Lstm<Scalar>(store, "tagger.forward", dims.tagger_layers, dims.tagger_input,
                              dims.tagger_hidden, false);
  backward_ = ad::Lstm<Scalar>(store, "tagger.backward", dims.tagger_layers, dims.tagger_input,
                               dims.tagger_hidden, false);
  output_ = &store.add("tagger.output", tag_space, 2 * dims.tagger_hidden);
  output_bias_ = &store.add("tagger.output_bias", tag_space, 1, ad::Init::kZero);
}

template <typename Scalar>
std::vector<ad::Expr<Scalar>> TaggerNetwork<Scalar>::scores(
    ad::Graph<Scalar>& g, const std::vector<ad::Expr<Scalar>>& inputs) const {
  if (inputs.empty()) throw Error("cannot tag an empty sentence");
  std::vector<ad::Expr<Scalar>> projected;
  projected.reserve(inputs.size());
  for (const auto& x : inputs) {
    projected.push_back(ad::tanh(ad::affine(g.parameter(*input_bias_), {{g.parameter(*input_), x}})));
  }
  std::vector<ad::Expr<Scalar>> out;
  for (const auto& h : ad::bilstm(forward_, backward_, g, projected)) {
    out.push_back(ad::affine(g.parameter(*output_bias_), {{g.parameter(*output_), h}}));
  }
  return out;
}

template <typename Scalar>
std::vector<ad::Vector<Scalar>> TaggerNetwork<Scalar>::distributions(
    const std::vector<ad::Expr<Scalar>>& scores) const {
  std::vector<ad::Vector<Scalar>> out;
  for (const auto& s : scores) out.push_back(ad::masked_softmax<Scalar>(s.value(), mask_));
  return out;
}

template <typename Scalar>
std::vector<int> TaggerNetwork<Scalar>::argmax(const std::vector<ad::Expr<Scalar>>& scores) const {
  std::vector<int> tags;
  for (const auto& s : scores) {
    const auto& v = s.value();
    int best = -1;
    for (int id = 0; id < tag_space_; ++id) {
      if (mask_[id] && (best < 0 || v(id, 0) > v(best, 0))) best = id;
    }
    tags.push_back(best);
  }
  return tags;
}

template <typename Scalar>
ad::Expr<Scalar> TaggerNetwork<Scalar>::loss(ad::Graph<Scalar>& g,
                                             const std::vector<ad::Expr<Scalar>>& scores,
                                             const std::vector<int>& gold) const {
  if (gold.size() != scores.size()) throw Error("gold tag count does not match the sentence");
  std::vector<ad::Expr<Scalar>> terms;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (gold[i] == SymbolTable::kUnk) continue;
    terms.push_back(ad::softmax_cross_entropy(scores[i], gold[i], mask_));
  }
  if (terms.empty()) return g.input(ad::Matrix<Scalar>::Zero(1, 1));
  return ad::sum(terms);
}

template class TaggerNetwork<float>;
template class TaggerNetwork<double>;

}  // namespace polyparse
