#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "polyparse/representations.hpp"
#include "polyparse/training.hpp"

namespace polyparse {

// Settings shared by the command-line subcommands. Every key accepted in a
// config file is also a command-line flag of the same name.
struct RunConfig {
  std::vector<std::string> train;  // CoNLL-U files
  std::vector<std::string> dev;
  std::vector<std::string> langs;  // default language per file, or one for all
  std::string embeddings;
  std::string clusters;
  std::string wals;
  std::string model;
  ModelConfig model_config;
  std::uint64_t seed = 1;
  int patience = 5;
  int epochs = 30;
  double clip = 5.0;
  int workers = 1;
  std::size_t dev_sentences = 300;

  // Language assumed for sentences of the `file_index`-th input file that
  // carry no "# language = xx" comment. Empty when none was given.
  std::string default_language(std::size_t file_index) const;
};

// Flat "key = value" lines; '#' starts a comment, blank lines are ignored.
// List-valued keys may repeat or hold comma-separated values.
std::vector<std::pair<std::string, std::string>> read_config_pairs(std::istream& in);
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

// Throws ConfigError for unknown keys or malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// Every key apply_setting understands.
const std::vector<std::string>& config_keys();

// Checks switch consistency and that referenced files exist.
void validate_for_training(const RunConfig& config);

// Lexical resources named by the configuration (empty when not lexical).
LexicalResources load_resources(const RunConfig& config);

TrainOptions train_options(const RunConfig& config);

bool parse_bool(const std::string& text);

}  // namespace polyparse
