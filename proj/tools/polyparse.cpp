// Command-line front end: train, parse, tag, eval, analyze, projectivize and
// build-lexicon.

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "polyparse/config.hpp"
#include "polyparse/error.hpp"
#include "polyparse/evaluation.hpp"
#include "polyparse/lexicon.hpp"
#include "polyparse/model.hpp"
#include "polyparse/projectivity.hpp"
#include "polyparse/training.hpp"

namespace pp = polyparse;

namespace {

const std::set<std::string> kBooleanKeys = {"lexical", "fine-pos", "joint-tagging"};
const std::set<std::string> kListKeys = {"train", "dev", "langs"};

// Registers every configuration key as a flag of `cmd`; values given on the
// command line land in `values`.
void add_config_flags(CLI::App* cmd, std::map<std::string, std::vector<std::string>>& values,
                      const std::vector<std::string>& keys) {
  for (const auto& key : keys) {
    auto& slot = values[key];
    if (kBooleanKeys.count(key)) {
      slot.resize(1);
      cmd->add_flag("--" + key + "{true}", slot[0], "enable " + key + " (or --" + key + "=false)");
    } else if (kListKeys.count(key)) {
      cmd->add_option("--" + key, slot, key + " (repeatable or comma-separated)");
    } else {
      slot.resize(1);
      cmd->add_option("--" + key, slot[0], key);
    }
  }
}

// Config file first, then flags given on the command line.
pp::RunConfig resolve_config(CLI::App* cmd, const std::string& config_path,
                             const std::map<std::string, std::vector<std::string>>& values) {
  pp::RunConfig config;
  std::set<std::string> overridden;
  for (const auto& [key, slot] : values) {
    if (cmd->get_option("--" + key)->count() > 0) overridden.insert(key);
  }
  if (!config_path.empty()) {
    for (const auto& [key, value] : pp::read_config_file(config_path)) {
      if (!overridden.count(key)) pp::apply_setting(config, key, value);
    }
  }
  for (const auto& key : overridden) {
    for (const auto& value : values.at(key)) pp::apply_setting(config, key, value);
  }
  return config;
}

std::vector<pp::Sentence> read_inputs(const std::vector<std::string>& paths,
                                      const pp::RunConfig& config, bool annotated) {
  std::vector<pp::Sentence> sentences;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    pp::ReadOptions options;
    options.language = config.default_language(i);
    options.validate_trees = annotated;
    options.allow_missing_heads = !annotated;
    auto treebank = pp::read_conllu_file(paths[i], options);
    if (treebank.skipped) {
      std::cerr << "warning: skipped " << treebank.skipped << " malformed sentence(s) in " << paths[i]
                << '\n';
    }
    for (auto& s : treebank.sentences) sentences.push_back(std::move(s));
  }
  return sentences;
}

// One treebank per language, in order of first appearance.
std::vector<pp::Treebank> group_by_language(std::vector<pp::Sentence> sentences,
                                            const std::string& split) {
  std::vector<pp::Treebank> treebanks;
  std::map<std::string, std::size_t> index;
  for (auto& s : sentences) {
    if (s.language.empty()) {
      throw pp::ConfigError(
          "sentence without a language: add '# language = xx' or pass --langs");
    }
    auto [it, inserted] = index.emplace(s.language, treebanks.size());
    if (inserted) {
      pp::Treebank t;
      t.language = s.language;
      t.split = split;
      treebanks.push_back(std::move(t));
    }
    pp::Sentence pre = pp::preprocess(std::move(s));
    treebanks[it->second].sentences.push_back(std::move(pre));
  }
  return treebanks;
}

void write_sentences(std::vector<pp::Sentence> sentences, const std::string& path) {
  pp::Treebank out;
  out.sentences = std::move(sentences);
  if (path.empty() || path == "-") {
    pp::write_conllu(out, std::cout);
  } else {
    pp::write_conllu_file(out, path);
  }
}

std::vector<pp::Sentence> read_plain(const std::string& path) {
  pp::ReadOptions options;
  options.validate_trees = false;
  options.allow_missing_heads = true;
  return pp::read_conllu_file(path, options).sentences;
}

int cmd_train(CLI::App* cmd, const std::string& config_path,
              const std::map<std::string, std::vector<std::string>>& values,
              const std::string& log_path) {
  pp::RunConfig config = resolve_config(cmd, config_path, values);
  pp::validate_for_training(config);
  auto train = group_by_language(read_inputs(config.train, config, true), "train");
  auto dev = group_by_language(read_inputs(config.dev, config, true), "dev");
  pp::LexicalResources resources = pp::load_resources(config);
  pp::WalsTable wals;
  if (!config.wals.empty()) wals = pp::load_wals_file(config.wals);
  auto model = pp::build_model<float>(config.model_config, train, std::move(resources),
                                      config.wals.empty() ? nullptr : &wals);

  std::ofstream log_file;
  pp::TrainOptions options = pp::train_options(config);
  options.log = &std::cerr;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw pp::Error("cannot write log file " + log_path);
    options.log = &log_file;
  }
  std::cerr << "training on " << train.size() << " language(s):";
  for (const auto& t : train) std::cerr << ' ' << t.language << " (" << t.sentences.size() << ')';
  std::cerr << '\n';
  auto result = pp::train(*model, train, dev, options);
  model->save_file(config.model);
  std::cerr << "best epoch " << result.best_epoch << " dev UAS " << result.best_dev_uas
            << "; model written to " << config.model << '\n';
  return 0;
}

int cmd_parse(const std::string& model_path, const std::string& input, const std::string& output,
              const std::vector<std::string>& langs, int workers, bool tags) {
  auto model = pp::Model<float>::load_file(model_path);
  if (tags && !model->tagger()) throw pp::Error("the model was trained without joint tagging");
  pp::RunConfig config;
  config.langs = langs;
  auto sentences = read_inputs({input}, config, false);
  for (const auto& s : sentences) {
    if (s.language.empty()) {
      throw pp::Error("sentence without a language: add '# language = xx' or pass --langs");
    }
  }
  auto outputs = pp::parse_all(*model, sentences, workers);
  auto annotated = tags ? sentences : pp::annotate_all(*model, sentences, outputs, false);
  if (tags) {
    for (std::size_t i = 0; i < annotated.size(); ++i) {
      for (std::size_t t = 0; t < annotated[i].tokens.size(); ++t) {
        annotated[i].tokens[t].upos = model->vocabulary().upos.symbol(outputs[i].tags[t]);
      }
    }
  }
  write_sentences(std::move(annotated), output);
  return 0;
}

int cmd_eval(const std::string& gold_path, const std::string& predicted_path,
             const std::string& tsv_path) {
  auto report = pp::evaluate(read_plain(gold_path), read_plain(predicted_path));
  pp::write_report_text(report, std::cout);
  if (!tsv_path.empty()) {
    std::ofstream out(tsv_path);
    if (!out) throw pp::Error("cannot write " + tsv_path);
    pp::write_report_tsv(report, out);
  }
  return 0;
}

int cmd_analyze(const std::string& gold_path, const std::string& predicted_path) {
  pp::write_recall_text(pp::class_recall(read_plain(gold_path), read_plain(predicted_path)),
                        std::cout);
  return 0;
}

int cmd_projectivize(const std::string& input, const std::string& output) {
  pp::ReadOptions options;
  auto treebank = pp::read_conllu_file(input, options);
  int lifted = 0;
  for (auto& s : treebank.sentences) {
    auto result = pp::projectivize_counted(pp::unlabeled_tree(s));
    lifted += result.lifts;
    s = pp::with_heads(std::move(s), result.tree);
  }
  write_sentences(std::move(treebank.sentences), output);
  std::cerr << "lifted " << lifted << " arc(s)";
  if (treebank.skipped) std::cerr << "; skipped " << treebank.skipped << " malformed sentence(s)";
  std::cerr << '\n';
  return 0;
}

int cmd_build_lexicon(const std::string& dictionary_path, const std::string& english_embeddings,
                      const std::string& english_clusters, const std::string& out_embeddings,
                      const std::string& out_clusters, const std::vector<std::string>& treebanks,
                      const std::vector<std::string>& langs) {
  auto dictionary = pp::load_dictionary_file(dictionary_path);
  if (dictionary.empty()) throw pp::Error("the dictionary is empty");
  // Target words: the dictionary's, plus every lowercased form of the given
  // treebanks so that unaligned words can use the edit-distance fallback.
  std::vector<pp::TargetWord> targets;
  if (!treebanks.empty()) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : dictionary) seen.emplace(e.language, e.target);
    pp::RunConfig config;
    config.langs = langs;
    for (const auto& s : read_inputs(treebanks, config, false)) {
      if (s.language.empty()) {
        throw pp::Error("sentence without a language: add '# language = xx' or pass --langs");
      }
      for (const auto& t : s.tokens) seen.emplace(s.language, pp::to_lower_utf8(t.form));
    }
    for (const auto& [language, word] : seen) targets.push_back({language, word});
  }
  if (!english_embeddings.empty()) {
    if (out_embeddings.empty()) throw pp::ConfigError("--output-embeddings is required");
    auto english = pp::load_embeddings_file(english_embeddings);
    auto projected = pp::robust_projection(english, dictionary, targets);
    std::ofstream out(out_embeddings);
    if (!out) throw pp::Error("cannot write " + out_embeddings);
    pp::write_embeddings(projected, out);
    std::cerr << "projected " << projected.size() << " word vector(s)\n";
  }
  if (!english_clusters.empty()) {
    if (out_clusters.empty()) throw pp::ConfigError("--output-clusters is required");
    auto projected = pp::project_clusters(pp::load_clusters_file(english_clusters), dictionary);
    std::ofstream out(out_clusters);
    if (!out) throw pp::Error("cannot write " + out_clusters);
    pp::write_clusters(projected, out);
    std::cerr << "projected " << projected.cluster_of.size() << " cluster assignment(s)\n";
  }
  if (english_embeddings.empty() && english_clusters.empty()) {
    throw pp::ConfigError("give --english-embeddings and/or --english-clusters");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilingual stack-LSTM dependency parser"};
  app.require_subcommand(1);

  std::map<std::string, std::vector<std::string>> train_values;
  std::string config_path, log_path;
  auto* train = app.add_subcommand("train", "train one model on treebanks of several languages");
  train->add_option("--config", config_path, "flat key = value settings file")
      ->check(CLI::ExistingFile);
  train->add_option("--log", log_path, "write the per-epoch log here instead of stderr");
  add_config_flags(train, train_values, pp::config_keys());

  std::string model_path, input, output = "-";
  std::vector<std::string> langs;
  int workers = 1;
  auto* parse = app.add_subcommand("parse", "predict heads and relations");
  auto* tag = app.add_subcommand("tag", "predict coarse POS tags (joint-tagging models)");
  for (auto* cmd : {parse, tag}) {
    cmd->add_option("--model", model_path, "model file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--input", input, "CoNLL-U input")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output", output, "CoNLL-U output ('-' for stdout)");
    cmd->add_option("--langs", langs, "language of sentences lacking a '# language' comment");
    cmd->add_option("--workers", workers, "decoding threads")->check(CLI::PositiveNumber);
  }

  std::string gold, predicted, tsv;
  auto* eval = app.add_subcommand("eval", "attachment scores and tag accuracy");
  auto* analyze = app.add_subcommand("analyze", "recall of attachment classes");
  for (auto* cmd : {eval, analyze}) {
    cmd->add_option("--gold", gold, "gold CoNLL-U")->required()->check(CLI::ExistingFile);
    cmd->add_option("--predicted", predicted, "predicted CoNLL-U")
        ->required()
        ->check(CLI::ExistingFile);
  }
  eval->add_option("--tsv", tsv, "also write language/metric/value lines here");

  auto* projectivize = app.add_subcommand("projectivize", "lift nonprojective arcs");
  projectivize->add_option("--input", input, "CoNLL-U input")->required()->check(CLI::ExistingFile);
  projectivize->add_option("--output", output, "CoNLL-U output ('-' for stdout)");

  std::string dictionary, english_embeddings, english_clusters, out_embeddings, out_clusters;
  auto* lexicon = app.add_subcommand("build-lexicon", "project English embeddings and clusters");
  lexicon->add_option("--dictionary", dictionary, "lang<TAB>word<TAB>english<TAB>probability")
      ->required()
      ->check(CLI::ExistingFile);
  lexicon->add_option("--english-embeddings", english_embeddings)->check(CLI::ExistingFile);
  lexicon->add_option("--english-clusters", english_clusters)->check(CLI::ExistingFile);
  lexicon->add_option("--output-embeddings", out_embeddings);
  lexicon->add_option("--output-clusters", out_clusters);
  std::vector<std::string> lexicon_treebanks, lexicon_langs;
  lexicon->add_option("--treebank", lexicon_treebanks,
                      "CoNLL-U files whose words should receive vectors (repeatable)")
      ->check(CLI::ExistingFile);
  lexicon->add_option("--langs", lexicon_langs, "language of each --treebank file, or one for all");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train, config_path, train_values, log_path);
    if (parse->parsed()) return cmd_parse(model_path, input, output, langs, workers, false);
    if (tag->parsed()) return cmd_parse(model_path, input, output, langs, workers, true);
    if (eval->parsed()) return cmd_eval(gold, predicted, tsv);
    if (analyze->parsed()) return cmd_analyze(gold, predicted);
    if (projectivize->parsed()) return cmd_projectivize(input, output);
    if (lexicon->parsed()) {
      return cmd_build_lexicon(dictionary, english_embeddings, english_clusters, out_embeddings,
                               out_clusters, lexicon_treebanks, lexicon_langs);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
