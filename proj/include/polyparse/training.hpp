#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

#include "polyparse/model.hpp"
#include "polyparse/optimizer.hpp"
#include "polyparse/treebank.hpp"

namespace polyparse {

struct SentenceRef {
  std::size_t treebank = 0;
  std::size_t sentence = 0;
  bool operator==(const SentenceRef&) const = default;
};

using MiniBatch = std::vector<SentenceRef>;

// Balanced multilingual mini-batches: each batch holds one sentence per
// treebank, and an epoch lasts until the smallest treebank is used up. Every
// treebank keeps a shuffled queue that carries over between epochs; when a
// queue runs dry it is reshuffled, with sentences already drawn in the
// current epoch placed last so no sentence repeats within an epoch.
class BalancedBatcher {
 public:
  BalancedBatcher(std::vector<std::size_t> sizes, std::uint64_t seed);

  std::size_t epoch_length() const { return epoch_length_; }
  std::vector<MiniBatch> next_epoch();

 private:
  struct Queue {
    std::vector<std::size_t> order;
    std::size_t cursor = 0;
  };
  void refill(Queue& queue, std::size_t size, const std::vector<bool>& drawn);

  std::vector<std::size_t> sizes_;
  std::vector<Queue> queues_;
  std::size_t epoch_length_ = 0;
  ad::Rng rng_;
};

// Stops once `patience` consecutive epochs fail to improve the best score.
// Equal scores are ranked by `tie_break` (development LAS during training).
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);
  // Returns true when `score` is a new best.
  bool update(double score, double tie_break = -std::numeric_limits<double>::infinity());
  bool should_stop() const { return epochs_since_best_ >= patience_; }
  int best_epoch() const { return best_epoch_; }  // 1-based, 0 before any update
  double best_score() const { return best_; }
  int epochs_seen() const { return epochs_; }

 private:
  int patience_;
  int epochs_ = 0;
  int best_epoch_ = 0;
  int epochs_since_best_ = 0;
  double best_ = -std::numeric_limits<double>::infinity();
  double best_tie_ = -std::numeric_limits<double>::infinity();
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double loss = 0;
  double tagging_loss = 0;
  double learning_rate = 0;
  double dev_uas = 0;
  double dev_las = 0;
  double dev_tag_accuracy = 0;
  double mu = 0;  // block-dropout rate used in the epoch that follows
  bool improved = false;
};

struct TrainOptions {
  int max_epochs = 30;
  int patience = 5;
  std::uint64_t seed = 1;
  int workers = 1;
  ad::SgdOptions sgd;
  std::size_t dev_sentences_per_language = 300;
  std::ostream* log = nullptr;
  // Optional extra stopping rule checked after every epoch.
  std::function<bool(const EpochLog&)> stop_when;
};

struct TrainResult {
  int best_epoch = 0;
  double best_dev_uas = 0;
  std::vector<EpochLog> history;
};

// Initializes and trains `model` on the union of `train`, selecting the
// epoch with the best development UAS. The model ends up holding the best
// snapshot. An empty `dev` falls back to the training sentences. Throws on a
// non-finite loss.
template <typename Scalar>
TrainResult train(Model<Scalar>& model, const std::vector<Treebank>& train,
                  const std::vector<Treebank>& dev, const TrainOptions& options);

// The first `per_language` sentences of each language, in input order.
std::vector<Sentence> balanced_dev_set(const std::vector<Treebank>& dev, std::size_t per_language);

// Parses every sentence with `workers` threads; output order follows input.
template <typename Scalar>
std::vector<ParseOutput> parse_all(const Model<Scalar>& model, const std::vector<Sentence>& sentences,
                                   int workers);

// Annotated copies of `sentences` with predicted trees (and coarse tags when
// `write_tags` and the model tags).
template <typename Scalar>
std::vector<Sentence> annotate_all(const Model<Scalar>& model, const std::vector<Sentence>& sentences,
                                   const std::vector<ParseOutput>& outputs, bool write_tags);

// Builds the vocabulary, language vectors and model for a configuration.
template <typename Scalar>
std::unique_ptr<Model<Scalar>> build_model(const ModelConfig& config,
                                           const std::vector<Treebank>& train,
                                           LexicalResources resources, const WalsTable* wals);

}  // namespace polyparse
