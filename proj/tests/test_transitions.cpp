#include <doctest.h>

#include "polyparse/error.hpp"
#include "polyparse/projectivity.hpp"
#include "polyparse/transitions.hpp"
#include "support/testing.hpp"

using namespace polyparse;
using testing::tree_from_heads;

namespace {

DependencyTree replay(const std::vector<Action>& actions, int n) {
  auto config = initial_configuration(n);
  for (const auto& a : actions) {
    REQUIRE(legal_actions(config).allows(a.kind));
    apply_in_place(config, a);
  }
  REQUIRE(config.is_terminal());
  return tree_from_arcs(config.arcs, n);
}

}  // namespace

TEST_CASE("initial configuration") {
  auto c = initial_configuration(3);
  CHECK(c.stack == std::vector<int>{0});
  CHECK(c.buffer == std::vector<int>{1, 2, 3});
  CHECK(c.history.empty());
  CHECK(c.arcs.empty());
  CHECK(initial_configuration(1).buffer == std::vector<int>{1});
  CHECK_THROWS_AS(initial_configuration(0), Error);
}

TEST_CASE("legal actions") {
  CHECK(legal_actions(initial_configuration(2)) == LegalKinds{true, false, false});
  ParserConfiguration c;
  c.sentence_length = 2;
  c.stack = {0, 1, 2};
  CHECK(legal_actions(c) == LegalKinds{false, true, true});
  c.stack = {0, 1};
  CHECK(legal_actions(c) == LegalKinds{false, false, true});
  c.buffer = {2};
  CHECK(legal_actions(c) == LegalKinds{true, false, false});
}

TEST_CASE("transition effects follow the arc-standard table") {
  ParserConfiguration c;
  c.sentence_length = 3;
  c.stack = {0, 1, 2};
  c.buffer = {3};
  auto right = apply(c, Action::right(4));
  CHECK(right.stack == std::vector<int>{0, 1});
  CHECK(right.arcs == std::vector<Arc>{{1, 2, 4}});
  auto left = apply(c, Action::left(5));
  CHECK(left.stack == std::vector<int>{0, 2});
  CHECK(left.arcs == std::vector<Arc>{{2, 1, 5}});
  auto shift = apply(c, Action::shift());
  CHECK(shift.stack == std::vector<int>{0, 1, 2, 3});
  CHECK(shift.buffer.empty());
  CHECK(shift.history.size() == 1);
}

TEST_CASE("illegal actions name the violated precondition") {
  auto c = initial_configuration(2);
  CHECK_THROWS_WITH_AS(apply(c, Action::left(1)), doctest::Contains("stack"), StructureError);
  c.buffer.clear();
  CHECK_THROWS_AS(apply(c, Action::shift()), StructureError);
}

TEST_CASE("oracle examples") {
  auto right = tree_from_heads({0, 1}, 1);
  right.labels = {0, 2, 1};
  CHECK(oracle(right) == std::vector<Action>{Action::shift(), Action::shift(), Action::right(1),
                                             Action::right(2)});
  auto left = tree_from_heads({2, 0}, 1);
  left.labels = {0, 1, 2};
  CHECK(oracle(left) == std::vector<Action>{Action::shift(), Action::shift(), Action::left(1),
                                            Action::right(2)});
}

TEST_CASE("oracle rejects nonprojective trees") {
  CHECK_THROWS_WITH_AS(oracle(tree_from_heads({0, 4, 1, 1})), doctest::Contains("projectivize"),
                       StructureError);
}

TEST_CASE("oracle round trip on every projective tree n<=5") {
  for (int n = 1; n <= 5; ++n) {
    for (const auto& t : testing::all_trees(n)) {
      if (!testing::crossing_free(t)) continue;
      auto actions = oracle(t);
      CHECK(actions.size() == static_cast<std::size_t>(2 * n));
      CHECK(replay(actions, n) == t);
    }
  }
}

TEST_CASE("action inventory") {
  CHECK(ActionInventory(1).size() == 3);
  CHECK(ActionInventory(3).size() == 7);
  CHECK(ActionInventory(40).size() == 81);
  CHECK_THROWS_AS(ActionInventory(0), Error);
  ActionInventory inv(3);
  CHECK(inv[0] == Action::shift());
  CHECK(inv[1] == Action::left(1));
  CHECK(inv[2] == Action::right(1));
  for (int id = 0; id < inv.size(); ++id) CHECK(inv.id(inv[id]) == id);
}

TEST_CASE("tree from arcs") {
  auto t = tree_from_arcs({{0, 1, 1}, {1, 2, 2}}, 2);
  CHECK(t.heads == std::vector<int>{-1, 0, 1});
  CHECK_THROWS_AS(tree_from_arcs({{0, 1, 1}, {1, 2, 2}, {0, 2, 1}}, 2), StructureError);
  CHECK_THROWS_AS(tree_from_arcs({{0, 1, 1}, {1, 2, 2}}, 3), StructureError);
}

TEST_CASE("greedy walks over legal actions always terminate in 2n steps") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + static_cast<int>(rng() % 8);
    auto c = initial_configuration(n);
    int steps = 0;
    while (!c.is_terminal()) {
      auto legal = legal_actions(c);
      REQUIRE(legal.any());
      std::vector<Action> options;
      if (legal.shift) options.push_back(Action::shift());
      if (legal.reduce_left) options.push_back(Action::left(1));
      if (legal.reduce_right) options.push_back(Action::right(1));
      apply_in_place(c, options[rng() % options.size()]);
      ++steps;
    }
    CHECK(steps == 2 * n);
    auto tree = tree_from_arcs(c.arcs, n);
    CHECK(testing::crossing_free(tree));
  }
}
