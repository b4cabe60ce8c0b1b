#include "polyparse/evaluation.hpp"

#include <cstdlib>
#include <iomanip>
#include <ostream>

#include "polyparse/error.hpp"

namespace polyparse {

namespace {

void check_aligned(const std::vector<Sentence>& gold, const std::vector<Sentence>& predicted) {
  if (gold.size() != predicted.size()) {
    throw Error("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                std::to_string(predicted.size()));
  }
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size()) {
      throw Error("sentence " + std::to_string(s + 1) + " has " + std::to_string(gold[s].size()) +
                  " gold tokens but " + std::to_string(predicted[s].size()) + " predicted");
    }
  }
}

std::string relation_group(const std::string& deprel) {
  if (deprel == "nsubj" || deprel == "nsubjpass") return "nsubj*";
  if (deprel == "dobj") return "dobj";
  if (deprel == "conj") return "conj";
  if (deprel == "ccomp" || deprel == "xcomp") return "*comp";
  if (deprel == "case") return "case";
  if (deprel == "nmod" || deprel == "nummod" || deprel == "amod" || deprel == "appos") return "*mod";
  return "";
}

double macro(const EvalReport& report, double (*metric)(const LanguageReport&)) {
  if (report.languages.empty()) return 0;
  double total = 0;
  for (const auto& [lang, r] : report.languages) total += metric(r);
  return total / static_cast<double>(report.languages.size());
}

}  // namespace

AttachmentScores attachment_scores(const std::vector<Sentence>& gold,
                                   const std::vector<Sentence>& predicted) {
  check_aligned(gold, predicted);
  AttachmentScores scores;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      const Token& g = gold[s].tokens[i];
      const Token& p = predicted[s].tokens[i];
      const bool head = g.gold_head == p.gold_head;
      ++scores.unlabeled.total;
      ++scores.labeled.total;
      scores.unlabeled.correct += head;
      scores.labeled.correct += head && g.gold_deprel == p.gold_deprel;
    }
  }
  return scores;
}

Count tag_accuracy(const std::vector<Sentence>& gold, const std::vector<Sentence>& predicted) {
  check_aligned(gold, predicted);
  Count c;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      ++c.total;
      c.correct += gold[s].tokens[i].upos == predicted[s].tokens[i].upos;
    }
  }
  return c;
}

const std::vector<std::string>& recall_classes() {
  static const std::vector<std::string> classes = {"left", "right", "root",  "short", "long",
                                                   "nsubj*", "dobj", "conj", "*comp", "case",
                                                   "*mod"};
  return classes;
}

std::map<std::string, Count> class_recall(const std::vector<Sentence>& gold,
                                          const std::vector<Sentence>& predicted) {
  check_aligned(gold, predicted);
  std::map<std::string, Count> recall;
  for (const auto& name : recall_classes()) recall[name];
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      const Token& g = gold[s].tokens[i];
      const Token& p = predicted[s].tokens[i];
      const bool head = g.gold_head == p.gold_head;
      auto count = [&](const std::string& name, bool correct) {
        ++recall[name].total;
        recall[name].correct += correct;
      };
      if (g.gold_head == 0) {
        count("root", head);
      } else {
        count(g.gold_head < g.index ? "left" : "right", head);
        const int distance = std::abs(g.gold_head - g.index);
        if (distance == 1) count("short", head);
        if (distance > 6) count("long", head);
      }
      const std::string group = relation_group(g.gold_deprel);
      if (!group.empty()) count(group, head && g.gold_deprel == p.gold_deprel);
    }
  }
  return recall;
}

double EvalReport::macro_uas() const {
  return macro(*this, [](const LanguageReport& r) { return r.scores.uas(); });
}

double EvalReport::macro_las() const {
  return macro(*this, [](const LanguageReport& r) { return r.scores.las(); });
}

double EvalReport::macro_tag_accuracy() const {
  return macro(*this, [](const LanguageReport& r) { return r.tags.percent(); });
}

EvalReport evaluate(const std::vector<Sentence>& gold, const std::vector<Sentence>& predicted) {
  check_aligned(gold, predicted);
  std::map<std::string, std::pair<std::vector<Sentence>, std::vector<Sentence>>> groups;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    auto& [g, p] = groups[gold[s].language];
    g.push_back(gold[s]);
    p.push_back(predicted[s]);
  }
  EvalReport report;
  for (const auto& [lang, pair] : groups) {
    report.languages[lang] = {attachment_scores(pair.first, pair.second),
                              tag_accuracy(pair.first, pair.second)};
  }
  report.recall = class_recall(gold, predicted);
  return report;
}

void write_report_text(const EvalReport& report, std::ostream& out) {
  out << std::fixed << std::setprecision(2);
  out << "language\tUAS\tLAS\ttags\ttokens\n";
  for (const auto& [lang, r] : report.languages) {
    out << (lang.empty() ? "-" : lang) << '\t' << r.scores.uas() << '\t' << r.scores.las() << '\t'
        << r.tags.percent() << '\t' << r.scores.unlabeled.total << '\n';
  }
  out << "macro\t" << report.macro_uas() << '\t' << report.macro_las() << '\t'
      << report.macro_tag_accuracy() << '\n';
}

void write_report_tsv(const EvalReport& report, std::ostream& out) {
  out << std::fixed << std::setprecision(4);
  for (const auto& [lang, r] : report.languages) {
    const std::string name = lang.empty() ? "-" : lang;
    out << name << "\tuas\t" << r.scores.uas() << '\n';
    out << name << "\tlas\t" << r.scores.las() << '\n';
    out << name << "\ttag_accuracy\t" << r.tags.percent() << '\n';
  }
  out << "macro\tuas\t" << report.macro_uas() << '\n';
  out << "macro\tlas\t" << report.macro_las() << '\n';
  out << "macro\ttag_accuracy\t" << report.macro_tag_accuracy() << '\n';
  for (const auto& name : recall_classes()) {
    auto it = report.recall.find(name);
    if (it != report.recall.end()) out << "all\trecall:" << name << '\t' << it->second.percent() << '\n';
  }
}

void write_recall_text(const std::map<std::string, Count>& recall, std::ostream& out) {
  out << std::fixed << std::setprecision(2);
  out << "class\trecall\tcorrect\ttotal\n";
  for (const auto& name : recall_classes()) {
    auto it = recall.find(name);
    if (it == recall.end()) continue;
    out << name << '\t' << it->second.percent() << '\t' << it->second.correct << '\t'
        << it->second.total << '\n';
  }
}

}  // namespace polyparse
