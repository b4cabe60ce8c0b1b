#include "polyparse/optimizer.hpp"

#include <cmath>

namespace polyparse::ad {

template <typename Scalar>
double gradient_norm(ParameterStore<Scalar>& store) {
  double total = 0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto& p = store[i];
    if (!p.trainable) continue;
    if (p.lookup) {
      for (Index c : p.touched_columns()) total += p.grad.col(c).template cast<double>().squaredNorm();
    } else {
      total += p.grad.template cast<double>().squaredNorm();
    }
  }
  return std::sqrt(total);
}

template <typename Scalar>
double clip_gradients(ParameterStore<Scalar>& store, double threshold) {
  const double norm = gradient_norm(store);
  if (threshold <= 0 || norm <= threshold) return 1.0;
  const double factor = threshold / norm;
  const auto s = static_cast<Scalar>(factor);
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto& p = store[i];
    if (!p.trainable) continue;
    if (p.lookup) {
      for (Index c : p.touched_columns()) p.grad.col(c) *= s;
    } else {
      p.grad *= s;
    }
  }
  return factor;
}

template <typename Scalar>
SgdStep SgdTrainer<Scalar>::update(ParameterStore<Scalar>& store, int epoch) {
  SgdStep step;
  step.rate = learning_rate(epoch);
  step.gradient_norm = gradient_norm(store);
  step.clip_scale = clip_gradients(store, options_.clip_threshold);
  const auto rate = static_cast<Scalar>(step.rate);
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto& p = store[i];
    if (!p.trainable) continue;
    if (p.lookup) {
      for (Index c : p.touched_columns()) p.value.col(c) -= rate * p.grad.col(c);
    } else {
      p.value -= rate * p.grad;
    }
    p.zero_grad();
  }
  return step;
}

template class SgdTrainer<float>;
template class SgdTrainer<double>;
template double gradient_norm<float>(ParameterStore<float>&);
template double gradient_norm<double>(ParameterStore<double>&);
template double clip_gradients<float>(ParameterStore<float>&, double);
template double clip_gradients<double>(ParameterStore<double>&, double);

}  // namespace polyparse::ad
