#pragma once

#include <string>
#include <vector>

#include "polyparse/tree.hpp"

namespace polyparse {

enum class ActionKind { kShift, kReduceLeft, kReduceRight };

// Arc-standard transition. `label` is a relation id (>= 1) for reduces and 0
// for SHIFT.
struct Action {
  ActionKind kind = ActionKind::kShift;
  int label = 0;

  static Action shift() { return {}; }
  static Action left(int label) { return {ActionKind::kReduceLeft, label}; }
  static Action right(int label) { return {ActionKind::kReduceRight, label}; }

  bool is_reduce() const { return kind != ActionKind::kShift; }
  bool operator==(const Action&) const = default;
};

std::string to_string(const Action& action);

// Dense action ids: 0 = SHIFT, then (left, right) per label id 1..labels.
class ActionInventory {
 public:
  explicit ActionInventory(int label_count);

  int size() const { return static_cast<int>(actions_.size()); }
  int label_count() const { return label_count_; }
  const Action& operator[](int id) const { return actions_[id]; }
  int id(const Action& action) const;
  const std::vector<Action>& actions() const { return actions_; }

 private:
  int label_count_;
  std::vector<Action> actions_;
};

ActionInventory action_inventory(int label_count);

struct Arc {
  int head;
  int dependent;
  int label;
  bool operator==(const Arc&) const = default;
};

// Position 0 is the ROOT sentinel; tokens are 1..n.
struct ParserConfiguration {
  std::vector<int> stack;   // top is back()
  std::vector<int> buffer;  // front is front()
  std::vector<Action> history;
  std::vector<Arc> arcs;
  int sentence_length = 0;

  bool is_terminal() const { return buffer.empty() && stack.size() == 1; }
};

ParserConfiguration initial_configuration(int sentence_length);

struct LegalKinds {
  bool shift = false;
  bool reduce_left = false;
  bool reduce_right = false;

  bool any() const { return shift || reduce_left || reduce_right; }
  bool allows(ActionKind kind) const;
  bool operator==(const LegalKinds&) const = default;
};

LegalKinds legal_actions(const ParserConfiguration& config);

// Throws StructureError naming the violated precondition.
ParserConfiguration apply(ParserConfiguration config, const Action& action);
void apply_in_place(ParserConfiguration& config, const Action& action);

// Static arc-standard oracle over a projective tree; exactly 2n actions.
std::vector<Action> oracle(const DependencyTree& tree);

DependencyTree tree_from_arcs(const std::vector<Arc>& arcs, int sentence_length);

}  // namespace polyparse
