#include <doctest.h>

#include <sstream>

#include "polyparse/error.hpp"
#include "polyparse/training.hpp"
#include "support/testing.hpp"

using namespace polyparse;
using Mat = ad::Matrix<double>;

namespace {

SymbolTable languages(std::initializer_list<const char*> names) {
  SymbolTable t;
  for (const char* n : names) t.add(n);
  return t;
}

WalsTable wals_fixture() {
  std::istringstream in(
      "aa\tG1\t82A=1\t83A=1\t85A=1\t86A=1\t87A=1\n"
      "bb\tG1\t82A=2\t83A=2\t85A=2\t86A=2\t87A=2\n"
      "cc\tG1\t82A=1\t83A=2\t85A=1\t86A=2\n"
      "dd\tG2\t82A=1\t83A=1\t85A=1\t86A=1\t87A=1\t1A=3\n");
  return load_wals(in);
}

ModelConfig lexical_config() {
  ModelConfig c;
  c.lexical = true;
  c.language_vector = LanguageVectorMode::kLangId;
  c.fine_pos = true;
  c.dims = testing::small_dims();
  return c;
}

}  // namespace

TEST_CASE("mode and variant names round-trip") {
  for (auto m : {LanguageVectorMode::kNone, LanguageVectorMode::kLangId,
                 LanguageVectorMode::kWordOrder, LanguageVectorMode::kFullWals}) {
    CHECK(parse_language_vector_mode(to_string(m)) == m);
  }
  CHECK(parse_block_dropout_variant("normalized") == BlockDropoutVariant::kNormalized);
  CHECK_THROWS_AS(parse_language_vector_mode("typology"), ConfigError);
}

TEST_CASE("language-ID vectors are orthogonal one-hots") {
  auto langs = languages({"de", "fr", "sv"});
  auto de = language_vector("de", LanguageVectorMode::kLangId, langs, nullptr).values;
  auto fr = language_vector("fr", LanguageVectorMode::kLangId, langs, nullptr).values;
  CHECK(de.size() == 3);
  CHECK(de(0) == 1.0);
  CHECK(de.sum() == 1.0);
  CHECK(de.dot(fr) == 0.0);
  CHECK_THROWS_AS(language_vector("it", LanguageVectorMode::kLangId, langs, nullptr), Error);
  auto m = language_vector_matrix(LanguageVectorMode::kLangId, langs, nullptr);
  CHECK(m.cols() == 4);
  CHECK(m.col(0).isZero());
  CHECK(m.col(2) == fr);
}

TEST_CASE("word-order vectors use the five word-order features") {
  auto wals = wals_fixture();
  auto langs = languages({"aa", "bb", "dd"});
  auto aa = language_vector("aa", LanguageVectorMode::kWordOrder, langs, &wals).values;
  auto dd = language_vector("dd", LanguageVectorMode::kWordOrder, langs, &wals).values;
  CHECK(aa.size() == 10);
  CHECK(aa.sum() == 5.0);
  CHECK(aa == dd);  // 1A is not a word-order feature
  CHECK_THROWS_AS(language_vector("zz", LanguageVectorMode::kWordOrder, langs, &wals), Error);
  CHECK_THROWS_AS(language_vector("aa", LanguageVectorMode::kWordOrder, langs, nullptr), Error);
}

TEST_CASE("missing features take the genus mean") {
  auto wals = wals_fixture();
  auto langs = languages({"aa", "bb", "cc", "dd"});
  auto cc = language_vector("cc", LanguageVectorMode::kWordOrder, langs, &wals).values;
  // 87A is the last one-hot pair: genus-mates aa (1) and bb (2) average out.
  CHECK(cc(8) == doctest::Approx(0.5));
  CHECK(cc(9) == doctest::Approx(0.5));
  auto full = language_vector("cc", LanguageVectorMode::kFullWals, langs, &wals).values;
  // Features sort as 1A, 82A, ...; 1A has a one-value domain.
  CHECK(full.size() == 11);
  CHECK(full(9) == doctest::Approx(0.0));
  CHECK(full(10) == doctest::Approx(0.0));
  CHECK(full(0) == doctest::Approx(1.0));  // no genus-mate has 1A; all-language mean is dd's
  CHECK(full.maxCoeff() <= 1.0);
  CHECK(full.minCoeff() >= -1.0);
}

TEST_CASE("mu follows the development error rate") {
  DropoutState d;
  CHECK(d.mu == 1.0);
  d.update_mu(0.933);
  CHECK(d.mu == doctest::Approx(0.067));
  d.update_mu(1.0);
  CHECK(d.mu == 0.0);
  d.update_mu(1.5);
  CHECK(d.mu == 0.0);
}

TEST_CASE("block dropout") {
  ad::Graph<double> g;
  ad::Rng rng(11);
  Mat v(3, 1);
  v << 0.25, -1.5, 3.0;
  auto e = g.input(v);
  SUBCASE("mu = 1 zeroes the vector") {
    for (int i = 0; i < 20; ++i) {
      CHECK(block_dropout(e, 1.0, true, BlockDropoutVariant::kVerbatim, rng).value().isZero(0));
    }
  }
  SUBCASE("test time is the identity, bit for bit") {
    for (double mu : {0.0, 0.3, 1.0}) {
      CHECK(block_dropout(e, mu, false, BlockDropoutVariant::kVerbatim, rng).value() == v);
    }
  }
  SUBCASE("mu = 0 disables dropout") {
    CHECK(block_dropout(e, 0.0, true, BlockDropoutVariant::kVerbatim, rng).value() == v);
  }
  SUBCASE("mu = 0.5 drops half the draws and doubles the rest") {
    int zeros = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
      auto out = block_dropout(e, 0.5, true, BlockDropoutVariant::kVerbatim, rng).value();
      if (out.isZero(0)) {
        ++zeros;
      } else {
        CHECK(out == 2.0 * v);
      }
    }
    CHECK(std::abs(zeros / double(draws) - 0.5) <= 0.02);
  }
  SUBCASE("normalized variant divides by the keep rate") {
    bool seen = false;
    for (int i = 0; i < 50; ++i) {
      auto out = block_dropout(e, 0.25, true, BlockDropoutVariant::kNormalized, rng).value();
      if (!out.isZero(0)) {
        CHECK(out.isApprox(v / 0.75));
        seen = true;
      }
    }
    CHECK(seen);
  }
  SUBCASE("rate outside [0, 1] is rejected") {
    CHECK_THROWS_AS(block_dropout(e, 1.5, true, BlockDropoutVariant::kVerbatim, rng), Error);
  }
}

TEST_CASE("token representations") {
  auto data = testing::toy_multilingual(10, 3);
  auto model = build_model<double>(lexical_config(), data.train, data.resources, nullptr);
  ad::Rng rng(5);
  model->initialize(rng);
  const auto& reps = model->representations();
  const auto& d = model->config().dims;
  CHECK(reps.uses_pretrained());
  CHECK(reps.uses_words());
  CHECK(reps.uses_clusters());
  CHECK(reps.uses_fine_pos());
  CHECK(reps.uses_language());
  CHECK(reps.parse_dim() == 8 + d.word + d.cluster + d.upos + d.xpos + d.language);
  CHECK(reps.tag_dim() == 8 + d.cluster + d.language);

  auto a = model->encode(data.train[0].sentences[0], false);
  auto b = model->encode(data.train[1].sentences[0], false);
  DropoutState test;

  SUBCASE("dimension is constant across tokens and languages") {
    ad::Graph<double> g;
    for (const auto* s : {&a, &b}) {
      auto l = reps.language_embedding(g, s->language);
      for (const auto& tok : s->tokens) CHECK(reps.token_rep_parse(g, tok, l, test).rows() == reps.parse_dim());
    }
  }

  SUBCASE("unknown words use the learned UNK pretrained vector") {
    auto s = data.train[0].sentences[0];
    s.tokens[0].form = s.tokens[0].lowercased_form = "neverseen";
    auto enc = model->encode(s, false);
    CHECK(enc.tokens[0].pretrained == -1);
    ad::Graph<double> g;
    auto l = reps.language_embedding(g, enc.language);
    auto r = reps.token_rep_tag(g, enc.tokens[0], l).value();
    CHECK(r.topRows(8) == model->store().get("pretrained_unk").value);
  }

  SUBCASE("same word gives the same tagging representation") {
    auto s = data.train[0].sentences[0];
    auto t = data.train[0].sentences[1];
    t.tokens[1] = s.tokens[0];
    auto es = model->encode(s, false), et = model->encode(t, false);
    ad::Graph<double> g;
    auto l = reps.language_embedding(g, es.language);
    CHECK(reps.token_rep_tag(g, es.tokens[0], l).value() ==
          reps.token_rep_tag(g, et.tokens[1], l).value());
  }

  SUBCASE("pretrained vectors are fixed and get no gradient") {
    auto& pre = model->store().get("pretrained");
    CHECK_FALSE(pre.trainable);
    const Mat before = pre.value;
    DropoutState train_state;
    train_state.training = true;
    train_state.rng = &rng;
    train_state.mu = 0;
    ad::Graph<double> g;
    auto enc = model->encode(data.train[0].sentences[0], true);
    g.backward(model->loss(g, enc, train_state));
    CHECK((pre.grad.size() == 0 || pre.grad.isZero()));
    ad::SgdTrainer<double> sgd;
    sgd.update(model->store(), 0);
    CHECK(pre.value == before);
  }

  SUBCASE("the cluster table is shared by tagging and parsing") {
    ad::Graph<double> g0;
    auto l = reps.language_embedding(g0, a.language);
    const auto& tok = a.tokens[0];
    auto parse_before = reps.token_rep_parse(g0, tok, l, test).value();
    auto tag_before = reps.token_rep_tag(g0, tok, l).value();
    model->store().get("cluster_embeddings").value.col(tok.cluster).array() += 1.0;
    ad::Graph<double> g1;
    auto l1 = reps.language_embedding(g1, a.language);
    auto parse_after = reps.token_rep_parse(g1, tok, l1, test).value();
    auto tag_after = reps.token_rep_tag(g1, tok, l1).value();
    const int offset_parse = 8 + d.word, offset_tag = 8;
    CHECK((parse_after - parse_before).middleRows(offset_parse, d.cluster).isApproxToConstant(1.0));
    CHECK((tag_after - tag_before).middleRows(offset_tag, d.cluster).isApproxToConstant(1.0));
    CHECK(reps.clusters() == &model->store().get("cluster_embeddings"));
  }

  SUBCASE("fine-POS dropout zeroes the slice without rescaling") {
    const auto& tok = a.tokens[1];
    const int offset = 8 + d.word + d.cluster + d.upos;
    DropoutState always;
    always.training = true;
    always.rng = &rng;
    always.fine_pos_rate = 1.0;
    always.unk_prob = 0;
    DropoutState never = always;
    never.fine_pos_rate = 0.0;
    ad::Graph<double> g;
    auto l = reps.language_embedding(g, a.language);
    CHECK(reps.token_rep_parse(g, tok, l, always).value().middleRows(offset, d.xpos).isZero(0));
    CHECK(reps.token_rep_parse(g, tok, l, never).value().middleRows(offset, d.xpos) ==
          model->store().get("xpos_embeddings").value.col(tok.xpos));
  }
}

TEST_CASE("predicted-tag path drops the fine-POS slice") {
  auto data = testing::toy_multilingual(10, 3);
  auto config = lexical_config();
  config.joint_tagging = true;
  auto model = build_model<double>(config, data.train, data.resources, nullptr);
  ad::Rng rng(5);
  model->initialize(rng);
  const auto& reps = model->representations();
  CHECK_FALSE(reps.uses_fine_pos());
  auto enc = model->encode(data.train[0].sentences[0], false);
  ad::Graph<double> g;
  DropoutState test;
  auto l = reps.language_embedding(g, enc.language);
  auto r = reps.token_rep_parse(g, enc.tokens[0], l, test, 2);
  CHECK(r.rows() == reps.parse_dim());
  DropoutState training;
  training.training = true;
  CHECK_THROWS_AS(reps.token_rep_parse(g, enc.tokens[0], l, training, 2), Error);
}

TEST_CASE("lexical features without embeddings are a configuration error") {
  auto data = testing::toy_multilingual(4, 3);
  CHECK_THROWS_AS(build_model<double>(lexical_config(), data.train, LexicalResources{}, nullptr),
                  ConfigError);
}
