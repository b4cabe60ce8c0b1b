#include "polyparse/treebank.hpp"

#include <charconv>
#include <clocale>
#include <cwctype>
#include <fstream>
#include <istream>
#include <locale.h>
#include <ostream>
#include <sstream>

#include "polyparse/error.hpp"

namespace polyparse {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

bool parse_int(const std::string& text, int& value) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

struct Block {
  Sentence sentence;
  std::size_t first_line = 0;
  std::vector<std::size_t> head_lines;
};

// Returns a strict, line-numbered error for heads that point outside the
// sentence; tree-shape violations are left to tree_violation().
void check_head_range(const Block& block) {
  const int n = static_cast<int>(block.sentence.tokens.size());
  for (std::size_t i = 0; i < block.sentence.tokens.size(); ++i) {
    const auto& token = block.sentence.tokens[i];
    if (token.gold_head < 0 || token.gold_head > n) {
      throw StructureError("line " + std::to_string(block.head_lines[i]) + ": head " +
                           std::to_string(token.gold_head) + " out of range for sentence of " +
                           std::to_string(n) + " tokens");
    }
    if (token.index != static_cast<int>(i) + 1) {
      throw StructureError("line " + std::to_string(block.head_lines[i]) +
                           ": token ids must be consecutive starting at 1");
    }
  }
}

locale_t utf8_locale() {
  static locale_t loc = [] {
    locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(0));
    if (!l) l = newlocale(LC_CTYPE_MASK, "C.utf8", static_cast<locale_t>(0));
    return l;
  }();
  return loc;
}

}  // namespace

std::size_t Treebank::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

std::string metadata_language(const std::vector<std::string>& metadata) {
  for (const auto& line : metadata) {
    auto body = line.substr(1);
    auto eq = body.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(body.substr(0, eq)) == "language") return trim(body.substr(eq + 1));
  }
  return {};
}

Treebank read_conllu(std::istream& in, const ReadOptions& options) {
  Treebank treebank;
  treebank.language = options.language;
  treebank.split = options.split;

  Block block;
  auto flush = [&] {
    if (block.sentence.tokens.empty()) {
      block = Block{};
      return;
    }
    auto& sentence = block.sentence;
    if (sentence.annotated) check_head_range(block);
    auto lang = metadata_language(sentence.metadata);
    sentence.language = lang.empty() ? options.language : lang;
    if (options.validate_trees && sentence.annotated && !tree_violation(sentence).empty()) {
      ++treebank.skipped;
    } else {
      treebank.sentences.push_back(std::move(sentence));
    }
    block = Block{};
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      if (!block.sentence.tokens.empty()) {
        throw ParseError("comment line inside a sentence block", line_no);
      }
      block.sentence.metadata.push_back(line);
      continue;
    }
    auto fields = split_tabs(line);
    if (fields.size() != 10) {
      throw ParseError("expected 10 tab-separated columns, found " + std::to_string(fields.size()),
                       line_no);
    }
    const auto& id = fields[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;

    Token token;
    if (!parse_int(id, token.index) || token.index < 1) {
      throw ParseError("invalid token ID '" + id + "'", line_no);
    }
    token.form = fields[1];
    token.lowercased_form = token.form;
    token.lemma = fields[2];
    token.upos = fields[3];
    token.xpos = fields[4];
    token.feats = fields[5];
    if (fields[6] == "_" && options.allow_missing_heads) {
      token.gold_head = 0;
      block.sentence.annotated = false;
    } else if (!parse_int(fields[6], token.gold_head)) {
      throw ParseError("non-integer HEAD '" + fields[6] + "'", line_no);
    }
    token.gold_deprel = fields[7];
    token.deps = fields[8];
    token.misc = fields[9];
    if (block.sentence.tokens.empty()) block.first_line = line_no;
    block.sentence.tokens.push_back(std::move(token));
    block.head_lines.push_back(line_no);
  }
  flush();
  return treebank;
}

Treebank read_conllu_file(const std::string& path, const ReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_conllu(in, options);
}

void write_conllu(const Treebank& treebank, std::ostream& out) {
  for (const auto& sentence : treebank.sentences) {
    for (const auto& line : sentence.metadata) out << line << '\n';
    for (const auto& t : sentence.tokens) {
      out << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.xpos
          << '\t' << t.feats << '\t';
      if (sentence.annotated) {
        out << t.gold_head;
      } else {
        out << '_';
      }
      out << '\t' << t.gold_deprel << '\t' << t.deps << '\t' << t.misc << '\n';
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing CoNLL-U output");
}

void write_conllu_file(const Treebank& treebank, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_conllu(treebank, out);
}

std::string to_lower_utf8(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  locale_t loc = utf8_locale();
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    char32_t cp;
    std::size_t len;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1f;
      len = 2;
    } else if ((c >> 4) == 0xe) {
      cp = c & 0x0f;
      len = 3;
    } else if ((c >> 3) == 0x1e) {
      cp = c & 0x07;
      len = 4;
    } else {
      out.push_back(text[i++]);  // invalid lead byte, copy through
      continue;
    }
    if (i + len > text.size()) {
      out.append(text, i, std::string::npos);
      break;
    }
    bool valid = true;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc >> 6) != 0x2) valid = false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (!valid) {
      out.push_back(text[i++]);
      continue;
    }
    char32_t lower = cp;
    if (cp < 0x80) {
      if (cp >= 'A' && cp <= 'Z') lower = cp + 32;
    } else if (loc) {
      lower = static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc));
    }
    if (lower < 0x80) {
      out.push_back(static_cast<char>(lower));
    } else if (lower < 0x800) {
      out.push_back(static_cast<char>(0xc0 | (lower >> 6)));
      out.push_back(static_cast<char>(0x80 | (lower & 0x3f)));
    } else if (lower < 0x10000) {
      out.push_back(static_cast<char>(0xe0 | (lower >> 12)));
      out.push_back(static_cast<char>(0x80 | ((lower >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (lower & 0x3f)));
    } else {
      out.push_back(static_cast<char>(0xf0 | (lower >> 18)));
      out.push_back(static_cast<char>(0x80 | ((lower >> 12) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | ((lower >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (lower & 0x3f)));
    }
    i += len;
  }
  return out;
}

Sentence preprocess(Sentence sentence) {
  for (auto& token : sentence.tokens) {
    token.lowercased_form = to_lower_utf8(token.form);
    auto colon = token.gold_deprel.find(':');
    if (colon != std::string::npos) token.gold_deprel.resize(colon);
  }
  return sentence;
}

void preprocess(Treebank& treebank) {
  for (auto& s : treebank.sentences) s = preprocess(std::move(s));
}

std::string tree_violation(const Sentence& sentence) {
  const int n = static_cast<int>(sentence.size());
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const int h = sentence.tokens[i].gold_head;
    if (h < 0 || h > n) return "head out of range at token " + std::to_string(i + 1);
    if (h == i + 1) return "token " + std::to_string(i + 1) + " is its own head";
    if (h == 0) ++roots;
  }
  if (roots != 1) return "expected exactly one root, found " + std::to_string(roots);
  // Every token must reach the root; a walk longer than n means a cycle.
  for (int i = 1; i <= n; ++i) {
    int node = i;
    for (int steps = 0; node != 0; ++steps) {
      if (steps > n) return "cycle through token " + std::to_string(i);
      node = sentence.tokens[node - 1].gold_head;
    }
  }
  return {};
}

}  // namespace polyparse
