#include "polyparse/projectivity.hpp"

#include <algorithm>
#include <set>

#include "polyparse/error.hpp"

namespace polyparse {

bool is_descendant(const DependencyTree& tree, int node, int ancestor) {
  const int n = tree.size();
  for (int steps = 0; node > 0 && steps <= n; ++steps) {
    node = tree.heads[node];
    if (node == ancestor) return true;
  }
  return ancestor == 0;
}

bool is_projective_arc(const DependencyTree& tree, int dependent) {
  const ArcSpan arc{tree.heads[dependent], dependent};
  for (int k = arc.lo() + 1; k < arc.hi(); ++k) {
    if (!is_descendant(tree, k, arc.head)) return false;
  }
  return true;
}

bool is_projective(const DependencyTree& tree) {
  for (int d = 1; d <= tree.size(); ++d) {
    if (!is_projective_arc(tree, d)) return false;
  }
  return true;
}

std::vector<ArcSpan> lift_candidates(const DependencyTree& tree) {
  std::vector<ArcSpan> arcs;
  for (int d = 1; d <= tree.size(); ++d) {
    if (!is_projective_arc(tree, d)) arcs.push_back({tree.heads[d], d});
  }
  std::stable_sort(arcs.begin(), arcs.end(),
                   [](const ArcSpan& a, const ArcSpan& b) { return a.length() < b.length(); });
  return arcs;
}

std::optional<ArcSpan> next_lift(const DependencyTree& tree) {
  auto arcs = lift_candidates(tree);
  if (arcs.empty()) return std::nullopt;
  return arcs.front();
}

ProjectivizeResult projectivize_greedy(DependencyTree tree) {
  ProjectivizeResult result;
  while (auto arc = next_lift(tree)) {
    // A nonprojective arc never has ROOT as its head (ROOT dominates all).
    tree.heads[arc->dependent] = tree.heads[arc->head];
    ++result.lifts;
  }
  result.tree = std::move(tree);
  return result;
}

ProjectivizeResult projectivize_counted(DependencyTree tree, std::size_t state_budget) {
  auto greedy = projectivize_greedy(tree);
  // One lift is always minimal for a nonprojective tree.
  if (greedy.lifts <= 1) return greedy;

  std::vector<std::vector<int>> level{tree.heads};
  std::set<std::vector<int>> seen{tree.heads};
  DependencyTree scratch = tree;
  for (int depth = 1; depth < greedy.lifts; ++depth) {
    std::vector<std::vector<int>> next_level;
    for (const auto& heads : level) {
      scratch.heads = heads;
      for (const auto& arc : lift_candidates(scratch)) {
        auto lifted = heads;
        lifted[arc.dependent] = heads[arc.head];
        if (!seen.insert(lifted).second) continue;
        scratch.heads = lifted;
        if (is_projective(scratch)) {
          tree.heads = std::move(lifted);
          return {std::move(tree), depth};
        }
        scratch.heads = heads;
        if (seen.size() > state_budget) return greedy;
        next_level.push_back(std::move(lifted));
      }
    }
    level = std::move(next_level);
  }
  return greedy;
}

DependencyTree projectivize(const DependencyTree& tree) { return projectivize_counted(tree).tree; }

Sentence projectivize(Sentence sentence) {
  auto tree = projectivize(unlabeled_tree(sentence));
  return with_heads(std::move(sentence), tree);
}

}  // namespace polyparse
