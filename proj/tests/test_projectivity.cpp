#include <doctest.h>

#include <deque>
#include <map>
#include <set>

#include "polyparse/projectivity.hpp"
#include "support/testing.hpp"

using namespace polyparse;
using testing::tree_from_heads;

namespace {

// Minimum number of lifts of nonprojective arcs needed to reach a
// projective tree, by breadth-first search over lift sequences.
int minimum_lifts(const DependencyTree& start) {
  std::deque<std::pair<std::vector<int>, int>> queue{{start.heads, 0}};
  std::set<std::vector<int>> seen{start.heads};
  while (!queue.empty()) {
    auto [heads, depth] = queue.front();
    queue.pop_front();
    DependencyTree t(static_cast<int>(heads.size()) - 1);
    t.heads = heads;
    if (testing::crossing_free(t)) return depth;
    for (int d = 1; d <= t.size(); ++d) {
      if (t.heads[d] == 0 || is_projective_arc(t, d)) continue;
      auto next = heads;
      next[d] = heads[heads[d]];
      if (seen.insert(next).second) queue.push_back({next, depth + 1});
    }
  }
  return -1;
}

}  // namespace

TEST_CASE("chains and single tokens are projective") {
  CHECK(is_projective(tree_from_heads({0, 1, 2, 3, 4})));
  CHECK(is_projective(tree_from_heads({0})));
}

TEST_CASE("crossing example is nonprojective") {
  // head(2)=4, head(3)=1, head(1)=0, head(4)=1
  auto t = tree_from_heads({0, 4, 1, 1});
  CHECK_FALSE(testing::crossing_free(t));
  CHECK_FALSE(is_projective(t));
}

TEST_CASE("is_projective agrees with the pairwise crossing oracle on all trees n<=6") {
  for (int n = 1; n <= 6; ++n) {
    for (const auto& t : testing::all_trees(n)) CHECK(is_projective(t) == testing::crossing_free(t));
  }
}

TEST_CASE("projective input is a fixpoint") {
  auto t = tree_from_heads({2, 0, 2, 3});
  auto r = projectivize_counted(t);
  CHECK(r.tree == t);
  CHECK(r.lifts == 0);
}

TEST_CASE("crossing example needs the minimum number of lifts") {
  auto t = tree_from_heads({0, 4, 1, 1});
  auto r = projectivize_counted(t);
  CHECK(is_projective(r.tree));
  CHECK(r.lifts == minimum_lifts(t));
  CHECK(r.lifts == 1);
}

TEST_CASE("the search reaches the minimum where the greedy order does not") {
  int greedy_worse = 0;
  for (int n = 1; n <= 5; ++n) {
    for (const auto& t : testing::all_trees(n)) {
      if (testing::crossing_free(t)) continue;
      const int best = minimum_lifts(t);
      const auto searched = projectivize_counted(t);
      CHECK(searched.lifts == best);
      CHECK(testing::crossing_free(searched.tree));
      const auto greedy = projectivize_greedy(t);
      CHECK(greedy.lifts >= best);
      greedy_worse += greedy.lifts > best;
      // With no budget the search gives up and returns the greedy result.
      CHECK(projectivize_counted(t, 0).tree == greedy.tree);
    }
  }
  CHECK(greedy_worse > 0);
}

TEST_CASE("lift order is shortest arc first, leftmost dependent on ties") {
  auto t = tree_from_heads({0, 4, 1, 1});
  auto next = next_lift(t);
  REQUIRE(next.has_value());
  CHECK(next->dependent == 2);
  CHECK(next->head == 4);
  CHECK(next->lo() == 2);
  CHECK(next->hi() == 4);
}

TEST_CASE("random trees become projective, labels and root preserved, idempotent") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + static_cast<int>(rng() % 10);
    auto t = testing::random_tree(n, rng, 3);
    auto p = projectivize(t);
    REQUIRE(testing::crossing_free(p));
    CHECK(p.labels == t.labels);
    for (int i = 1; i <= n; ++i) CHECK((p.heads[i] == 0) == (t.heads[i] == 0));
    CHECK(projectivize(p) == p);
  }
}

TEST_CASE("sentence-level projectivization keeps relations") {
  auto s = testing::make_sentence("en", {{"a", "X", 0, "root"},
                                         {"b", "X", 4, "x"},
                                         {"c", "X", 1, "y"},
                                         {"d", "X", 1, "z"}});
  auto p = projectivize(s);
  CHECK(p.tokens[1].gold_head == 1);
  CHECK(p.tokens[1].gold_deprel == "x");
}
