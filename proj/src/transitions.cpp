#include "polyparse/transitions.hpp"

#include "polyparse/error.hpp"
#include "polyparse/projectivity.hpp"

namespace polyparse {

std::string to_string(const Action& action) {
  switch (action.kind) {
    case ActionKind::kShift:
      return "SHIFT";
    case ActionKind::kReduceLeft:
      return "REDUCE_LEFT(" + std::to_string(action.label) + ")";
    case ActionKind::kReduceRight:
      return "REDUCE_RIGHT(" + std::to_string(action.label) + ")";
  }
  return "?";
}

ActionInventory::ActionInventory(int label_count) : label_count_(label_count) {
  if (label_count < 1) throw Error("action inventory needs at least one relation label");
  actions_.reserve(1 + 2 * label_count);
  actions_.push_back(Action::shift());
  for (int label = 1; label <= label_count; ++label) {
    actions_.push_back(Action::left(label));
    actions_.push_back(Action::right(label));
  }
}

int ActionInventory::id(const Action& action) const {
  if (action.kind == ActionKind::kShift) return 0;
  if (action.label < 1 || action.label > label_count_) {
    throw Error("relation label " + std::to_string(action.label) + " outside the inventory");
  }
  return 2 * action.label - (action.kind == ActionKind::kReduceLeft ? 1 : 0);
}

ActionInventory action_inventory(int label_count) { return ActionInventory(label_count); }

bool LegalKinds::allows(ActionKind kind) const {
  switch (kind) {
    case ActionKind::kShift:
      return shift;
    case ActionKind::kReduceLeft:
      return reduce_left;
    case ActionKind::kReduceRight:
      return reduce_right;
  }
  return false;
}

ParserConfiguration initial_configuration(int sentence_length) {
  if (sentence_length < 1) throw Error("cannot parse an empty sentence");
  ParserConfiguration config;
  config.sentence_length = sentence_length;
  config.stack.push_back(0);
  config.buffer.reserve(sentence_length);
  for (int i = 1; i <= sentence_length; ++i) config.buffer.push_back(i);
  return config;
}

LegalKinds legal_actions(const ParserConfiguration& config) {
  LegalKinds legal;
  legal.shift = !config.buffer.empty();
  if (config.stack.size() >= 2) {
    const bool root_below = config.stack[config.stack.size() - 2] == 0;
    // ROOT may only take the final remaining token as its single dependent.
    legal.reduce_right = !root_below || (config.buffer.empty() && config.stack.size() == 2);
    legal.reduce_left = !root_below;
  }
  return legal;
}

void apply_in_place(ParserConfiguration& config, const Action& action) {
  const auto legal = legal_actions(config);
  switch (action.kind) {
    case ActionKind::kShift:
      if (!legal.shift) throw StructureError("SHIFT requires a nonempty buffer");
      config.stack.push_back(config.buffer.front());
      config.buffer.erase(config.buffer.begin());
      break;
    case ActionKind::kReduceLeft:
    case ActionKind::kReduceRight: {
      if (config.stack.size() < 2) throw StructureError("reduce requires two stack items");
      if (!legal.allows(action.kind)) {
        throw StructureError(action.kind == ActionKind::kReduceLeft
                                 ? "REDUCE_LEFT cannot take ROOT as dependent"
                                 : "REDUCE_RIGHT from ROOT requires an empty buffer and a single "
                                   "token on the stack");
      }
      const int v = config.stack.back();
      const int u = config.stack[config.stack.size() - 2];
      config.stack.pop_back();
      config.stack.pop_back();
      if (action.kind == ActionKind::kReduceRight) {
        config.arcs.push_back({u, v, action.label});
        config.stack.push_back(u);
      } else {
        config.arcs.push_back({v, u, action.label});
        config.stack.push_back(v);
      }
      break;
    }
  }
  config.history.push_back(action);
}

ParserConfiguration apply(ParserConfiguration config, const Action& action) {
  apply_in_place(config, action);
  return config;
}

std::vector<Action> oracle(const DependencyTree& tree) {
  if (!is_projective(tree)) {
    throw StructureError("oracle requires a projective tree; projectivize the training data first");
  }
  const int n = tree.size();
  std::vector<int> pending(n + 1, 0);  // gold dependents not yet attached
  for (int d = 1; d <= n; ++d) ++pending[tree.heads[d]];

  auto config = initial_configuration(n);
  std::vector<Action> actions;
  actions.reserve(2 * n);
  while (!config.is_terminal()) {
    Action next = Action::shift();
    if (config.stack.size() >= 2) {
      const int v = config.stack.back();
      const int u = config.stack[config.stack.size() - 2];
      if (u != 0 && tree.heads[u] == v) {
        next = Action::left(tree.labels[u]);
      } else if (tree.heads[v] == u && pending[v] == 0) {
        next = Action::right(tree.labels[v]);
      }
    }
    if (next.is_reduce()) {
      --pending[next.kind == ActionKind::kReduceLeft ? config.stack.back()
                                                     : config.stack[config.stack.size() - 2]];
    } else if (config.buffer.empty()) {
      throw StructureError("oracle reached a dead end; tree is not reachable by arc-standard");
    }
    apply_in_place(config, next);
    actions.push_back(next);
  }
  return actions;
}

DependencyTree tree_from_arcs(const std::vector<Arc>& arcs, int sentence_length) {
  DependencyTree tree(sentence_length);
  std::vector<bool> seen(sentence_length + 1, false);
  for (const auto& arc : arcs) {
    if (arc.dependent < 1 || arc.dependent > sentence_length || arc.head < 0 ||
        arc.head > sentence_length) {
      throw StructureError("arc endpoint out of range");
    }
    if (seen[arc.dependent]) {
      throw StructureError("token " + std::to_string(arc.dependent) + " has two heads");
    }
    seen[arc.dependent] = true;
    tree.heads[arc.dependent] = arc.head;
    tree.labels[arc.dependent] = arc.label;
  }
  if (static_cast<int>(arcs.size()) < sentence_length) {
    throw StructureError("incomplete parse: " + std::to_string(arcs.size()) + " arcs for " +
                         std::to_string(sentence_length) + " tokens");
  }
  return tree;
}

}  // namespace polyparse
