#pragma once

#include "polyparse/autodiff.hpp"

namespace polyparse::ad {

struct SgdOptions {
  double initial_rate = 0.1;
  double decay = 0.1;
  double clip_threshold = 5.0;  // <= 0 disables clipping
};

struct SgdStep {
  double rate = 0;
  double gradient_norm = 0;
  double clip_scale = 1;
};

// Plain SGD with rate eta0 / (1 + decay * epoch) and global l2 clipping.
template <typename Scalar>
class SgdTrainer {
 public:
  explicit SgdTrainer(SgdOptions options = {}) : options_(options) {}

  double learning_rate(int epoch) const {
    return options_.initial_rate / (1.0 + options_.decay * epoch);
  }

  // Applies the accumulated gradients and zeroes them.
  SgdStep update(ParameterStore<Scalar>& store, int epoch);

  const SgdOptions& options() const { return options_; }

 private:
  SgdOptions options_;
};

template <typename Scalar>
double gradient_norm(ParameterStore<Scalar>& store);

// Rescales every gradient by threshold / norm when norm exceeds threshold.
// Returns the factor applied.
template <typename Scalar>
double clip_gradients(ParameterStore<Scalar>& store, double threshold);

}  // namespace polyparse::ad
