#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "polyparse/treebank.hpp"

namespace polyparse {

struct Count {
  long correct = 0;
  long total = 0;
  double percent() const { return total ? 100.0 * static_cast<double>(correct) / total : 0.0; }
};

struct AttachmentScores {
  Count unlabeled;
  Count labeled;
  double uas() const { return unlabeled.percent(); }
  double las() const { return labeled.percent(); }
};

// Throws when sentence or token counts differ.
AttachmentScores attachment_scores(const std::vector<Sentence>& gold,
                                   const std::vector<Sentence>& predicted);

// Percentage of tokens whose predicted UPOS equals the gold UPOS.
Count tag_accuracy(const std::vector<Sentence>& gold, const std::vector<Sentence>& predicted);

// Recall classes in report order. Positional classes ("left", "right",
// "root", "short", "long") need a correct head; relation groups need head
// and relation.
const std::vector<std::string>& recall_classes();
std::map<std::string, Count> class_recall(const std::vector<Sentence>& gold,
                                          const std::vector<Sentence>& predicted);

struct LanguageReport {
  AttachmentScores scores;
  Count tags;
};

struct EvalReport {
  std::map<std::string, LanguageReport> languages;
  std::map<std::string, Count> recall;
  double macro_uas() const;
  double macro_las() const;
  double macro_tag_accuracy() const;
};

// Groups sentences by language and computes every score.
EvalReport evaluate(const std::vector<Sentence>& gold, const std::vector<Sentence>& predicted);

void write_report_text(const EvalReport& report, std::ostream& out);
// One "language<TAB>metric<TAB>value" line per score.
void write_report_tsv(const EvalReport& report, std::ostream& out);
void write_recall_text(const std::map<std::string, Count>& recall, std::ostream& out);

}  // namespace polyparse
