#include <doctest.h>

#include <cmath>

#include "polyparse/error.hpp"
#include "polyparse/optimizer.hpp"
#include "polyparse/parser_model.hpp"
#include "support/testing.hpp"

using namespace polyparse;
using Mat = ad::Matrix<double>;

namespace {

constexpr int kTokenDim = 3;
constexpr int kLanguageDim = 2;
constexpr int kLabels = 2;

struct Fixture {
  ad::ParameterStore<double> store;
  ParserNetwork<double> net;
  explicit Fixture(int language_dim = 0, int tokens = 6, std::uint64_t seed = 1)
      : net(store, testing::tiny_dims(), kTokenDim, language_dim, kLabels) {
    for (int i = 0; i < tokens; ++i) store.add("x" + std::to_string(i), kTokenDim, 1);
    store.add("lang", kLanguageDim, 1);
    ad::Rng rng(seed);
    store.initialize(rng);
    for (std::size_t i = 0; i < store.size(); ++i) {
      store[i].grad.setZero(store[i].value.rows(), store[i].value.cols());
    }
  }
  std::vector<ad::Expr<double>> tokens(ad::Graph<double>& g, int n) {
    std::vector<ad::Expr<double>> xs;
    for (int i = 0; i < n; ++i) xs.push_back(g.parameter(store.get("x" + std::to_string(i))));
    return xs;
  }
  ad::Expr<double> language(ad::Graph<double>& g) { return g.parameter(store.get("lang")); }
};

// Number of action ids allowed in each configuration along a gold sequence.
std::vector<int> legal_counts(const std::vector<Action>& actions, int n) {
  std::vector<int> counts;
  auto config = initial_configuration(n);
  for (const auto& a : actions) {
    auto legal = legal_actions(config);
    counts.push_back(legal.shift + kLabels * (legal.reduce_left + legal.reduce_right));
    apply_in_place(config, a);
  }
  return counts;
}

}  // namespace

TEST_CASE("network shapes") {
  Fixture plain;
  CHECK(plain.net.actions().size() == 1 + 2 * kLabels);
  CHECK(plain.net.state_input_dim() == 3 * testing::tiny_dims().hidden);
  CHECK(plain.store.get("parser.W").value.cols() == plain.net.state_input_dim());
  Fixture lang(kLanguageDim);
  CHECK(lang.net.state_input_dim() == 3 * testing::tiny_dims().hidden + kLanguageDim);
  // The action history input carries the language embedding as well.
  CHECK(lang.store.get("parser.actions.l0.wx").value.cols() ==
        testing::tiny_dims().action + kLanguageDim);
}

TEST_CASE("parser state is a rectified affine map") {
  Fixture f;
  ad::Graph<double> g;
  auto s = g.input(Mat::Constant(3, 1, 1.0));
  f.store.get("parser.W").value.setZero();
  f.store.get("parser.W_bias").value.setZero();
  CHECK(f.net.state(g, s, s, s, {}).value().isZero(0));
  f.store.get("parser.W_bias").value.setConstant(-0.5);
  CHECK(f.net.state(g, s, s, s, {}).value().isZero(0));
  f.store.get("parser.W_bias").value.setConstant(0.5);
  CHECK(f.net.state(g, s, s, s, {}).value().isApproxToConstant(0.5));
}

TEST_CASE("composition with zero parameters is zero") {
  Fixture f;
  f.store.get("parser.U").value.setZero();
  f.store.get("parser.U_bias").value.setZero();
  ad::Graph<double> g;
  auto x = g.input(Mat::Constant(kTokenDim, 1, 2.0));
  CHECK(f.net.compose(g, x, x, 1).value().isZero(0));
}

TEST_CASE("action distributions over the legal set") {
  Fixture f;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 6;
    ad::Graph<double> g;
    auto run = f.net.run(g, f.tokens(g, n), {});
    REQUIRE(run.actions.size() == static_cast<std::size_t>(2 * n));
    CHECK(run.log_probs[0] == 0.0);  // only SHIFT is legal at the start
    auto config = initial_configuration(n);
    for (const auto& a : run.actions) {
      auto mask = f.net.legal_mask(config);
      ad::Graph<double> g2;
      auto s = g2.input(Mat::Random(testing::tiny_dims().hidden, 1));
      auto p = ad::masked_softmax<double>(f.net.action_scores(g2, f.net.state(g2, s, s, s, {})).value(), mask);
      CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-6));
      for (int id = 0; id < f.net.actions().size(); ++id) {
        if (!mask[id]) CHECK(p(id) == 0.0);
      }
      apply_in_place(config, a);
    }
  }
}

TEST_CASE("uniform scores give a loss of sum ln k") {
  Fixture f;
  f.store.get("parser.g").value.setZero();
  f.store.get("parser.q").value.setZero();
  std::mt19937_64 rng(4);
  for (int n = 1; n <= 6; ++n) {
    auto tree = testing::random_projective_tree(n, rng, kLabels);
    auto gold = oracle(tree);
    double expected = 0;
    for (int k : legal_counts(gold, n)) expected += std::log(static_cast<double>(k));
    ad::Graph<double> g;
    auto run = f.net.run(g, f.tokens(g, n), {}, &gold);
    CHECK(run.loss.scalar() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(run.tree == tree);
  }
}

TEST_CASE("greedy decoding yields complete projective trees deterministically") {
  Fixture f;
  for (int n = 1; n <= 6; ++n) {
    ad::Graph<double> g1, g2;
    auto a = f.net.run(g1, f.tokens(g1, n), {});
    auto b = f.net.run(g2, f.tokens(g2, n), {});
    CHECK(a.actions == b.actions);
    CHECK(a.tree == b.tree);
    CHECK(a.tree.size() == n);
    CHECK(testing::is_single_root_tree({a.tree.heads.begin() + 1, a.tree.heads.end()}));
    CHECK(testing::crossing_free(a.tree));
    if (n == 1) CHECK(a.tree.heads[1] == 0);
  }
}

TEST_CASE("teacher forcing rejects illegal gold actions") {
  Fixture f;
  ad::Graph<double> g;
  std::vector<Action> gold = {Action::left(1), Action::shift()};
  CHECK_THROWS_AS(f.net.run(g, f.tokens(g, 1), {}, &gold), StructureError);
}

TEST_CASE("language embeddings are required when configured") {
  Fixture f(kLanguageDim);
  ad::Graph<double> g;
  CHECK_THROWS_AS(f.net.run(g, f.tokens(g, 2), {}), Error);
  CHECK(f.net.run(g, f.tokens(g, 2), f.language(g)).tree.size() == 2);
}

TEST_CASE("popped dependents still receive gradient through the composition") {
  Fixture f;
  // 1 <- 2: SHIFT SHIFT LEFT RIGHT
  std::vector<Action> gold = {Action::shift(), Action::shift(), Action::left(1), Action::right(2)};
  ad::Graph<double> g;
  auto run = f.net.run(g, f.tokens(g, 2), {}, &gold);
  g.backward(run.loss);
  CHECK_FALSE(f.store.get("x0").grad.isZero(0));
  CHECK_FALSE(f.store.get("parser.U").grad.isZero(0));
}

TEST_CASE("parser loss gradients match finite differences") {
  for (int language_dim : {0, kLanguageDim}) {
    CAPTURE(language_dim);
    Fixture f(language_dim, 4, 9);
    std::mt19937_64 rng(5);
    auto tree = testing::random_projective_tree(4, rng, kLabels);
    auto gold = oracle(tree);
    auto report = testing::check_gradients(f.store, [&](ad::Graph<double>& g) {
      auto lang = language_dim ? f.language(g) : ad::Expr<double>{};
      return f.net.run(g, f.tokens(g, 4), lang, &gold).loss;
    });
    INFO(report.worst);
    CHECK(report.checked > 100);
    CHECK(report.max_error < 1e-4);
  }
}

TEST_CASE("overfitting one sentence lowers the loss and recovers the tree") {
  Fixture f(0, 5, 2);
  std::mt19937_64 rng(6);
  auto tree = testing::random_projective_tree(5, rng, kLabels);
  auto gold = oracle(tree);
  ad::SgdTrainer<double> sgd;
  std::vector<double> losses;
  for (int epoch = 0; epoch < 200; ++epoch) {
    ad::Graph<double> g;
    auto run = f.net.run(g, f.tokens(g, 5), {}, &gold);
    CHECK(run.loss.scalar() >= 0.0);
    losses.push_back(run.loss.scalar());
    g.backward(run.loss);
    sgd.update(f.store, 0);
  }
  CHECK(losses[1] < losses[0]);
  CHECK(losses[2] < losses[1]);
  CHECK(losses.back() < 0.1 * losses.front());
  ad::Graph<double> g;
  CHECK(f.net.run(g, f.tokens(g, 5), {}).tree == tree);
}
