#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glassbox/expr.hpp"

namespace glassbox {

// How a rule turns its children's expressions into its own expression.
struct Builder {
  enum class Kind : std::uint8_t {
    Call,     // builtin application of the children
    Var,
    Const,
    Lambda,
    Rec,
    CallRec,
    If,       // children: then, cond, else
    Or,
    And,
    List,
    Tuple,
    Set,
    Comp,     // children: body, iterable
    Method,   // child.<name>
    Index,    // child[<constant>]
  };

  Kind kind = Kind::Const;
  std::string name;                 // builtin, variable or loop variable
  std::vector<std::string> params;  // Lambda, Rec
  Value constant;                   // Const, Index

  // Canonical textual form, as written in grammar files ("call mod", "rec m n").
  std::string spec() const;
  static Builder parse(std::string_view spec);

  Expr build(std::vector<Expr> children) const;
  // Number of children this builder accepts, as [lo, hi].
  std::pair<int, int> arity_range() const;
};

struct Rule {
  int id = 0;         // dense, 0-based position in the grammar
  std::string label;  // name from the grammar file, e.g. "R4"
  int lhs = 0;
  std::vector<int> children;  // nonterminal per child slot
  Builder builder;
  std::string display;  // surface template with $0, $1, ... placeholders

  int arity() const { return static_cast<int>(children.size()); }
};

// Derivation tree: every node names the rule applied there.
struct ProgramTree {
  int rule = 0;
  std::vector<ProgramTree> children;

  bool operator==(const ProgramTree&) const = default;
};

// Position of a node being expanded: its parent's rule and which child slot it
// fills. The root has neither.
struct Context {
  int parent_rule = -1;
  int child_index = -1;

  static Context root() { return {}; }
  bool is_root() const { return parent_rule < 0; }
  bool operator==(const Context&) const = default;
};

// Context-free grammar over Expr-producing rules. Immutable once built.
class Grammar {
 public:
  Grammar() = default;
  // Validates: children reference existing nonterminals, every nonterminal has
  // a rule and derives some finite tree. Throws Error otherwise.
  Grammar(std::string name, std::vector<std::string> nonterminals, std::vector<Rule> rules, int start);

  const std::string& name() const { return name_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const Rule& rule(int id) const { return rules_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(rules_.size()); }
  int start() const { return start_; }
  int max_arity() const { return max_arity_; }
  const std::vector<std::string>& nonterminals() const { return nonterminals_; }
  const std::string& nonterminal_name(int nt) const { return nonterminals_.at(static_cast<std::size_t>(nt)); }
  int find_nonterminal(std::string_view name) const;  // -1 if absent
  int find_rule(std::string_view label) const;        // -1 if absent
  const std::vector<int>& rules_for(int nt) const { return by_lhs_.at(static_cast<std::size_t>(nt)); }
  // Smallest derivation size from each nonterminal.
  int min_size(int nt) const { return min_size_.at(static_cast<std::size_t>(nt)); }

  // Nonterminal a hole must be filled with in the given context.
  int nonterminal_at(const Context& ctx) const {
    return ctx.is_root() ? start_ : rule(ctx.parent_rule).children.at(static_cast<std::size_t>(ctx.child_index));
  }

  // "lhs -> children | builder | display", used for hashing and merging.
  std::string rule_signature(int id) const;
  // Stable 64-bit FNV-1a digest of the rule list and start symbol.
  std::uint64_t hash() const;
  std::string to_text() const;

 private:
  std::string name_;
  std::vector<std::string> nonterminals_;
  std::vector<Rule> rules_;
  int start_ = 0;
  int max_arity_ = 0;
  std::vector<std::vector<int>> by_lhs_;
  std::vector<int> min_size_;
};

// Grammar file format, one directive per line ('#' starts a comment):
//   grammar <name>
//   start <Nonterminal>
//   rule <label> <LHS> -> <child nonterminals...> | <builder> | <display>
Grammar parse_grammar(std::string_view text, std::string_view origin = "<text>");
Grammar load_grammar(const std::string& path);

// Union of rule sets; rules with identical signatures are merged. Start symbol
// and nonterminal order follow the first grammar.
Grammar merge_grammars(const std::string& name, const std::vector<const Grammar*>& parts);
// For every rule of `from`, the id of the rule with the same signature in `to`
// (or -1).
std::vector<int> rule_mapping(const Grammar& from, const Grammar& to);
ProgramTree remap_tree(const ProgramTree& tree, const std::vector<int>& mapping);

// Throws Error on wrong arity, nonterminal mismatch, unknown rule, or a size
// above `size_cap` (0 = unlimited).
void validate_tree(const ProgramTree& tree, const Grammar& g, int nonterminal = -1, int size_cap = 0);

Expr tree_to_expr(const ProgramTree& tree, const Grammar& g);
int tree_size(const ProgramTree& tree);
std::vector<int> preorder_rules(const ProgramTree& tree);
// Comma-separated preorder sequence of 1-based rule ordinals ("1,3,2,...").
std::string canonical_key(const ProgramTree& tree);
ProgramTree tree_from_key(std::string_view key, const Grammar& g);
// Rebuilds the derivation of `e` from nonterminal `nt` (start if -1). Throws if
// the grammar cannot produce `e`.
ProgramTree tree_from_expr(const Expr& e, const Grammar& g, int nt = -1);
ProgramTree tree_from_source(std::string_view source, const Grammar& g, int nt = -1);
// Substitutes children into display templates.
std::string display_tree(const ProgramTree& tree, const Grammar& g);

// Rule distribution for a context; entries indexed by rule id.
using ContextDistribution = std::function<std::span<const double>(const Context&)>;

// Sum over nodes of log p(rule | context); -inf if any factor is zero.
double tree_log_probability(const ProgramTree& tree, const ContextDistribution& probs);

// Visits every node in preorder with its context.
void for_each_node(const ProgramTree& tree,
                   const std::function<void(const ProgramTree&, const Context&)>& fn);

}  // namespace glassbox
