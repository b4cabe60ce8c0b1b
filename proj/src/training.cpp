#include "polyparse/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "polyparse/error.hpp"
#include "polyparse/evaluation.hpp"

namespace polyparse {

BalancedBatcher::BalancedBatcher(std::vector<std::size_t> sizes, std::uint64_t seed)
    : sizes_(std::move(sizes)), queues_(sizes_.size()), rng_(seed) {
  if (sizes_.empty()) throw Error("balanced batching needs at least one treebank");
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (sizes_[i] == 0) throw Error("training treebank " + std::to_string(i + 1) + " is empty");
  }
  epoch_length_ = *std::min_element(sizes_.begin(), sizes_.end());
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    refill(queues_[i], sizes_[i], std::vector<bool>(sizes_[i], false));
  }
}

void BalancedBatcher::refill(Queue& queue, std::size_t size, const std::vector<bool>& drawn) {
  std::vector<std::size_t> fresh, used;
  for (std::size_t s = 0; s < size; ++s) (drawn[s] ? used : fresh).push_back(s);
  std::shuffle(fresh.begin(), fresh.end(), rng_);
  std::shuffle(used.begin(), used.end(), rng_);
  queue.order = std::move(fresh);
  queue.order.insert(queue.order.end(), used.begin(), used.end());
  queue.cursor = 0;
}

std::vector<MiniBatch> BalancedBatcher::next_epoch() {
  std::vector<MiniBatch> batches(epoch_length_);
  for (std::size_t t = 0; t < queues_.size(); ++t) {
    Queue& queue = queues_[t];
    std::vector<bool> drawn(sizes_[t], false);
    for (std::size_t b = 0; b < epoch_length_; ++b) {
      if (queue.cursor == queue.order.size()) refill(queue, sizes_[t], drawn);
      const std::size_t s = queue.order[queue.cursor++];
      drawn[s] = true;
      batches[b].push_back({t, s});
    }
  }
  return batches;
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) throw ConfigError("patience must be at least 1");
}

bool EarlyStopping::update(double score, double tie_break) {
  ++epochs_;
  if (score > best_ || (score == best_ && tie_break > best_tie_)) {
    best_ = score;
    best_tie_ = tie_break;
    best_epoch_ = epochs_;
    epochs_since_best_ = 0;
    return true;
  }
  ++epochs_since_best_;
  return false;
}

std::vector<Sentence> balanced_dev_set(const std::vector<Treebank>& dev, std::size_t per_language) {
  std::map<std::string, std::size_t> taken;
  std::vector<Sentence> out;
  for (const auto& treebank : dev) {
    for (const auto& sentence : treebank.sentences) {
      if (taken[sentence.language]++ < per_language) out.push_back(sentence);
    }
  }
  return out;
}

template <typename Scalar>
std::vector<ParseOutput> parse_all(const Model<Scalar>& model, const std::vector<Sentence>& sentences,
                                   int workers) {
  std::vector<ParseOutput> outputs(sentences.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < sentences.size(); i = next++) {
      try {
        outputs[i] = model.parse(model.encode(sentences[i], false));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(sentences.size())));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return outputs;
}

template <typename Scalar>
std::vector<Sentence> annotate_all(const Model<Scalar>& model, const std::vector<Sentence>& sentences,
                                   const std::vector<ParseOutput>& outputs, bool write_tags) {
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Sentence s = model.annotate(sentences[i], outputs[i]);
    if (write_tags && !outputs[i].tags.empty()) {
      for (std::size_t t = 0; t < s.tokens.size(); ++t) {
        s.tokens[t].upos = model.vocabulary().upos.symbol(outputs[i].tags[t]);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

template <typename Scalar>
std::unique_ptr<Model<Scalar>> build_model(const ModelConfig& config,
                                           const std::vector<Treebank>& train,
                                           LexicalResources resources, const WalsTable* wals) {
  Vocabulary vocab = build_vocabulary(train);
  if (config.lexical) add_clusters(vocab, resources.clusters);
  Eigen::MatrixXd languages = language_vector_matrix(config.language_vector, vocab.languages, wals);
  return std::make_unique<Model<Scalar>>(config, std::move(vocab), std::move(resources), languages);
}

template <typename Scalar>
TrainResult train(Model<Scalar>& model, const std::vector<Treebank>& train,
                  const std::vector<Treebank>& dev, const TrainOptions& options) {
  ad::Rng rng(options.seed);
  model.initialize(rng);

  std::vector<std::vector<EncodedSentence>> encoded;
  std::vector<std::size_t> sizes;
  for (const auto& treebank : train) {
    std::vector<EncodedSentence> sentences;
    for (const auto& s : treebank.sentences) sentences.push_back(model.encode(s, true));
    if (sentences.empty()) continue;
    sizes.push_back(sentences.size());
    encoded.push_back(std::move(sentences));
  }
  if (encoded.empty()) throw Error("no training sentences");

  std::vector<Sentence> dev_set = balanced_dev_set(dev, options.dev_sentences_per_language);
  if (dev_set.empty()) {
    dev_set = balanced_dev_set(train, options.dev_sentences_per_language);
    if (options.log) *options.log << "no development data; selecting epochs on training sentences\n";
  }

  BalancedBatcher batcher(sizes, rng());
  ad::SgdTrainer<Scalar> sgd(options.sgd);
  DropoutState dropout;
  dropout.training = true;
  dropout.fine_pos_rate = model.config().fine_pos_dropout;
  dropout.unk_prob = model.config().unk_prob;
  dropout.variant = model.config().block_dropout;
  dropout.rng = &rng;

  EarlyStopping stopping(options.patience);
  std::vector<ad::Matrix<Scalar>> best = model.store().snapshot();
  TrainResult result;
  model.store().zero_grad();

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch + 1;
    log.learning_rate = sgd.learning_rate(epoch);
    for (const auto& batch : batcher.next_epoch()) {
      for (const auto& ref : batch) {
        ad::Graph<Scalar> g;
        LossParts parts;
        auto loss = model.loss(g, encoded[ref.treebank][ref.sentence], dropout, &parts);
        const double value = static_cast<double>(loss.scalar());
        if (!std::isfinite(value)) {
          throw Error("training diverged: non-finite loss in epoch " + std::to_string(epoch + 1));
        }
        log.loss += value;
        log.tagging_loss += parts.tagging;
        g.backward(loss);
      }
      sgd.update(model.store(), epoch);
    }

    const auto outputs = parse_all(model, dev_set, options.workers);
    const auto predicted = annotate_all(model, dev_set, outputs, true);
    const auto scores = attachment_scores(dev_set, predicted);
    log.dev_uas = scores.uas();
    log.dev_las = scores.las();
    if (model.tagger()) {
      const Count tags = tag_accuracy(dev_set, predicted);
      log.dev_tag_accuracy = tags.percent();
      dropout.update_mu(tags.total ? static_cast<double>(tags.correct) / tags.total : 0.0);
    }
    log.mu = dropout.mu;
    log.improved = stopping.update(log.dev_uas, log.dev_las);
    if (log.improved) best = model.store().snapshot();
    if (options.log) {
      *options.log << "epoch " << log.epoch << " loss " << log.loss << " lr " << log.learning_rate
                   << " dev UAS " << log.dev_uas << " LAS " << log.dev_las;
      if (model.tagger()) *options.log << " tags " << log.dev_tag_accuracy << " mu " << log.mu;
      *options.log << (log.improved ? " *" : "") << '\n';
    }
    result.history.push_back(log);
    if (stopping.should_stop()) break;
    if (options.stop_when && options.stop_when(log)) break;
  }
  model.store().restore(best);
  result.best_epoch = stopping.best_epoch();
  result.best_dev_uas = stopping.best_score();
  return result;
}

#define POLYPARSE_INSTANTIATE_TRAINING(S)                                                        \
  template TrainResult train<S>(Model<S>&, const std::vector<Treebank>&,                         \
                                const std::vector<Treebank>&, const TrainOptions&);              \
  template std::vector<ParseOutput> parse_all<S>(const Model<S>&, const std::vector<Sentence>&,  \
                                                 int);                                           \
  template std::vector<Sentence> annotate_all<S>(const Model<S>&, const std::vector<Sentence>&,  \
                                                 const std::vector<ParseOutput>&, bool);         \
  template std::unique_ptr<Model<S>> build_model<S>(const ModelConfig&,                          \
                                                    const std::vector<Treebank>&,                \
                                                    LexicalResources, const WalsTable*);

POLYPARSE_INSTANTIATE_TRAINING(float)
POLYPARSE_INSTANTIATE_TRAINING(double)

}  // namespace polyparse
