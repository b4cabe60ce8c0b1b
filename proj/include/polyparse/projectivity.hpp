#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "polyparse/tree.hpp"

namespace polyparse {

struct ArcSpan {
  int head;
  int dependent;

  int lo() const { return head < dependent ? head : dependent; }
  int hi() const { return head < dependent ? dependent : head; }
  int length() const { return hi() - lo(); }
};

bool is_descendant(const DependencyTree& tree, int node, int ancestor);

// An arc is projective when every token strictly inside its span is
// dominated by the arc's head.
bool is_projective_arc(const DependencyTree& tree, int dependent);
bool is_projective(const DependencyTree& tree);

// Nonprojective arcs in lift order: shortest first, then the leftmost
// dependent.
std::vector<ArcSpan> lift_candidates(const DependencyTree& tree);
std::optional<ArcSpan> next_lift(const DependencyTree& tree);

struct ProjectivizeResult {
  DependencyTree tree;
  int lifts = 0;
};

// Pseudo-projective "baseline" transform: repeatedly reattach the dependent of
// a nonprojective arc to its grandparent. Labels are untouched.
//
// The greedy variant always lifts next_lift(). The default searches lift
// sequences breadth-first (children in lift order) for the fewest lifts,
// and falls back to the greedy result once more than `state_budget` trees
// have been visited.
ProjectivizeResult projectivize_greedy(DependencyTree tree);
ProjectivizeResult projectivize_counted(DependencyTree tree, std::size_t state_budget = 200000);
DependencyTree projectivize(const DependencyTree& tree);

// Sentence-level convenience: projectivizes the gold heads in place.
Sentence projectivize(Sentence sentence);

}  // namespace polyparse
