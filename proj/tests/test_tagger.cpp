#include <doctest.h>

#include "polyparse/error.hpp"
#include "polyparse/tagger_model.hpp"
#include "polyparse/training.hpp"
#include "support/testing.hpp"

using namespace polyparse;
using Mat = ad::Matrix<double>;

namespace {

struct Fixture {
  ad::ParameterStore<double> store;
  TaggerNetwork<double> net;
  Fixture() : net(store, testing::small_dims(), 4, 5) {
    ad::Rng rng(2);
    store.initialize(rng);
  }
  std::vector<ad::Expr<double>> inputs(ad::Graph<double>& g, const std::vector<Mat>& xs) {
    std::vector<ad::Expr<double>> out;
    for (const auto& x : xs) out.push_back(g.input(x));
    return out;
  }
};

std::vector<Mat> random_inputs(int n, unsigned seed) {
  std::srand(seed);
  std::vector<Mat> xs;
  for (int i = 0; i < n; ++i) xs.push_back(Mat::Random(4, 1));
  return xs;
}

ModelConfig joint_config() {
  ModelConfig c;
  c.lexical = true;
  c.language_vector = LanguageVectorMode::kLangId;
  c.joint_tagging = true;
  c.dims = testing::tiny_dims();
  return c;
}

}  // namespace

TEST_CASE("tag distributions are proper and never pick UNK") {
  Fixture f;
  ad::Graph<double> g;
  auto scores = f.net.scores(g, f.inputs(g, random_inputs(6, 1)));
  auto dists = f.net.distributions(scores);
  REQUIRE(dists.size() == 6);
  for (const auto& p : dists) {
    CHECK(p.size() == 5);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p(SymbolTable::kUnk) == 0.0);
  }
  auto tags = f.net.argmax(scores);
  CHECK(tags.size() == 6);
  for (int t : tags) CHECK(t != SymbolTable::kUnk);
  CHECK(tags == f.net.argmax(scores));
}

TEST_CASE("zero parameters give uniform distributions and the smallest tag") {
  Fixture f;
  for (std::size_t i = 0; i < f.store.size(); ++i) f.store[i].value.setZero();
  ad::Graph<double> g;
  auto scores = f.net.scores(g, f.inputs(g, random_inputs(3, 2)));
  for (const auto& p : f.net.distributions(scores)) {
    for (int t = 1; t < 5; ++t) CHECK(p(t) == doctest::Approx(0.25));
  }
  for (int t : f.net.argmax(scores)) CHECK(t == 1);
}

TEST_CASE("a distant word changes the distribution") {
  Fixture f;
  auto xs = random_inputs(6, 3);
  ad::Graph<double> g;
  auto before = f.net.distributions(f.net.scores(g, f.inputs(g, xs)));
  xs[5] = Mat::Constant(4, 1, 3.0);
  auto after = f.net.distributions(f.net.scores(g, f.inputs(g, xs)));
  CHECK((before[0] - after[0]).norm() > 1e-9);
}

TEST_CASE("empty sentences cannot be tagged") {
  Fixture f;
  ad::Graph<double> g;
  CHECK_THROWS_AS(f.net.scores(g, {}), Error);
}

TEST_CASE("tagging loss skips UNK gold tags") {
  Fixture f;
  ad::Graph<double> g;
  auto scores = f.net.scores(g, f.inputs(g, random_inputs(3, 4)));
  const double full = f.net.loss(g, scores, {1, 2, 3}).scalar();
  const double partial = f.net.loss(g, scores, {1, SymbolTable::kUnk, 3}).scalar();
  const double only = f.net.loss(g, {scores[1]}, {2}).scalar();
  CHECK(full == doctest::Approx(partial + only).epsilon(1e-12));
  CHECK(f.net.loss(g, scores, {0, 0, 0}).scalar() == 0.0);
  CHECK_THROWS_AS(f.net.loss(g, scores, {1}), Error);
}

TEST_CASE("joint loss") {
  auto data = testing::toy_multilingual(6, 8);
  auto model = build_model<double>(joint_config(), data.train, data.resources, nullptr);
  ad::Rng rng(3);
  model->initialize(rng);
  REQUIRE(model->tagger() != nullptr);
  auto s = model->encode(data.train[1].sentences[2], true);

  SUBCASE("is the sum of its parts") {
    DropoutState d;
    d.training = true;
    d.rng = &rng;
    d.mu = 0;
    ad::Graph<double> g;
    LossParts parts;
    const double total = model->loss(g, s, d, &parts).scalar();
    CHECK(total == doctest::Approx(parts.tagging + parts.parsing).epsilon(1e-12));
    CHECK(total >= parts.tagging);
    CHECK(total >= parts.parsing);
    CHECK(parts.tagging > 0);
  }

  SUBCASE("with mu = 1 the parsing loss ignores the tagger") {
    auto parsing_loss = [&] {
      DropoutState d;
      d.training = true;
      d.mu = 1.0;
      d.unk_prob = 0;
      ad::Rng local(1);
      d.rng = &local;
      ad::Graph<double> g;
      LossParts parts;
      model->loss(g, s, d, &parts);
      return parts.parsing;
    };
    const double before = parsing_loss();
    auto& out = model->store().get("tagger.output");
    out.value = Mat::Random(out.value.rows(), out.value.cols()) * 5.0;
    CHECK(parsing_loss() == before);
  }

  SUBCASE("gradients match finite differences") {
    auto report = testing::check_gradients(model->store(), [&](ad::Graph<double>& g) {
      DropoutState d;
      d.training = true;
      d.mu = 0;
      d.fine_pos_rate = 0;
      d.unk_prob = 0;
      ad::Rng local(1);
      d.rng = &local;
      return model->loss(g, s, d);
    });
    INFO(report.worst);
    CHECK(report.max_error < 1e-4);
  }

  SUBCASE("prediction") {
    auto tags = model->predict_tags(s);
    CHECK(tags.size() == s.size());
    CHECK(tags == model->predict_tags(s));
    auto out = model->parse(s);
    CHECK(out.tags == tags);
  }
}

TEST_CASE("joint tagging needs a tagset and an input") {
  auto data = testing::toy_multilingual(4, 8);
  auto config = joint_config();
  config.lexical = false;
  config.language_vector = LanguageVectorMode::kNone;
  CHECK_THROWS_AS(build_model<double>(config, data.train, data.resources, nullptr), ConfigError);
  ad::ParameterStore<double> store;
  CHECK_THROWS_AS(TaggerNetwork<double>(store, testing::tiny_dims(), 3, 1), ConfigError);
}
