#pragma once

#include <cstdint>
#include <vector>

#include "gcpls/types.hpp"

namespace gcpls {

// A grammar symbol. Terminals are gap values in [1, terminal_bound];
// non-terminal ids start at terminal_bound + 1 in rule-creation order,
// so the kind test is a single comparison. Symbol 0 is never valid.
using Symbol = std::uint32_t;

// One grammar rule Z -> (left, right). The id is implicit: the i-th rule
// (0-based) has id terminal_bound + 1 + i. Both sides refer to terminals
// or earlier rules only, so the rule forest is acyclic by construction.
struct Rule {
  Symbol left = 0;
  Symbol right = 0;

  friend bool operator==(const Rule&, const Rule&) = default;
};

// The dictionary D: rules in creation order over a fixed terminal range.
struct Grammar {
  Symbol terminal_bound = 0;  // largest terminal (gap) value, G
  std::vector<Rule> rules;

  bool is_terminal(Symbol s) const { return s <= terminal_bound; }

  Symbol first_rule_id() const { return terminal_bound + 1; }

  Symbol next_rule_id() const {
    return terminal_bound + 1 + static_cast<Symbol>(rules.size());
  }

  // D[Z] lookup, O(1). Caller guarantees Z is a known non-terminal.
  const Rule& rule_for(Symbol z) const { return rules[z - terminal_bound - 1]; }

  Symbol add_rule(Symbol left, Symbol right) {
    Symbol id = next_rule_id();
    rules.push_back(Rule{left, right});
    return id;
  }

  std::size_t num_rules() const { return rules.size(); }

  // terminals + non-terminals
  std::size_t num_symbols() const { return terminal_bound + rules.size(); }

  friend bool operator==(const Grammar&, const Grammar&) = default;
};

}  // namespace gcpls
