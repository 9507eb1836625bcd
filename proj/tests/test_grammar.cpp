#include <cmath>
#include <set>

#include "doctest.h"
#include "glassbox/error.hpp"
#include "glassbox/grammar.hpp"
#include "glassbox/parse.hpp"

using namespace glassbox;

namespace {

std::string grammar_path(const std::string& name) { return std::string(GLASSBOX_DATA_DIR) + "/grammars/" + name; }

const Grammar& toy_solution() {
  static const Grammar g = load_grammar(grammar_path("toy_solution.grammar"));
  return g;
}

const Grammar& toy_problem() {
  static const Grammar g = load_grammar(grammar_path("toy_problem.grammar"));
  return g;
}

ProgramTree node(const Grammar& g, const char* label, std::vector<ProgramTree> kids = {}) {
  int id = g.find_rule(label);
  REQUIRE(id >= 0);
  return ProgramTree{id, std::move(kids)};
}

ProgramTree euclid() {
  const Grammar& g = toy_solution();
  auto R = [&](const char* l, std::vector<ProgramTree> k = {}) { return node(g, l, std::move(k)); };
  return R("R1", {R("R3", {R("R2", {R("R4", {R("R6"), R("R5")}), R("R5")}), R("R6"), R("R5")})});
}

// All derivations from `nt` with exactly `size` nodes, by direct recursion.
std::vector<ProgramTree> all_trees(const Grammar& g, int nt, int size) {
  std::vector<ProgramTree> out;
  if (size < 1) return out;
  for (int id : g.rules_for(nt)) {
    const Rule& r = g.rule(id);
    // distribute size-1 nodes over children
    std::vector<std::vector<ProgramTree>> partial{{}};
    std::vector<int> used{0};
    for (int child_nt : r.children) {
      std::vector<std::vector<ProgramTree>> next;
      std::vector<int> next_used;
      for (std::size_t p = 0; p < partial.size(); ++p) {
        for (int s = 1; used[p] + s <= size - 1; ++s) {
          for (auto& t : all_trees(g, child_nt, s)) {
            auto kids = partial[p];
            kids.push_back(t);
            next.push_back(std::move(kids));
            next_used.push_back(used[p] + s);
          }
        }
      }
      partial = std::move(next);
      used = std::move(next_used);
    }
    for (std::size_t p = 0; p < partial.size(); ++p) {
      if (used[p] == size - 1) out.push_back(ProgramTree{id, partial[p]});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("toy grammars load with the expected shape") {
  const Grammar& s = toy_solution();
  CHECK(s.size() == 16);
  CHECK(s.nonterminals().size() == 1);
  CHECK(s.max_arity() == 3);
  const Grammar& p = toy_problem();
  CHECK(p.size() == 10);
  CHECK(p.nonterminal_name(p.start()) == "Loss");
  CHECK(p.min_size(p.start()) == 3);
}

TEST_CASE("tree_to_expr") {
  const Grammar& g = toy_solution();
  CHECK(render(tree_to_expr(node(g, "R4", {node(g, "R6"), node(g, "R5")}), g)) == "mod(n, m)");
  Expr one = tree_to_expr(node(g, "R10"), g);
  CHECK(one->kind == ExprKind::Const);
  CHECK(one->constant.as_int() == 1);
  CHECK(render(tree_to_expr(euclid(), g)) == "rec(lambda m, n: (callrec(mod(n, m), m) if n else m))");
  CHECK(display_tree(euclid(), g) == "rec(lambda m, n: callrec(mod(n, m), m) if n else m)");
  CHECK_THROWS_AS(tree_to_expr(ProgramTree{g.find_rule("R4"), {node(g, "R6")}}, g), Error);
}

TEST_CASE("display parenthesizes loose operands") {
  const Grammar g = load_grammar(grammar_path("number_theory_solution.grammar"));
  auto R = [&](const char* l, std::vector<ProgramTree> k = {}) { return node(g, l, std::move(k)); };
  CHECK(display_tree(R("R19", {R("R5"), R("R20", {R("R10"), R("R5")})}), g) == "m - (1 < m)");
  CHECK(display_tree(R("R19", {R("R20", {R("R10"), R("R5")}), R("R5")}), g) == "(1 < m) - m");
  // delimited slots need no parentheses
  CHECK(display_tree(R("R4", {R("R19", {R("R5"), R("R10")}), R("R6")}), g) == "mod(m - 1, n)");
  CHECK(display_tree(R("R16", {R("R7", {R("R5"), R("R6")}), R("R9")}), g) == "(m + n, 0)");
}

TEST_CASE("tree size and canonical key") {
  const Grammar& g = toy_solution();
  CHECK(tree_size(node(g, "R9")) == 1);
  CHECK(tree_size(euclid()) == 9);
  CHECK(tree_size(node(g, "R7", {node(g, "R10"), node(g, "R10")})) == 3);
  CHECK(canonical_key(euclid()) == "1,3,2,4,6,5,5,6,5");
  CHECK(canonical_key(node(g, "R7", {node(g, "R5"), node(g, "R6")})) !=
        canonical_key(node(g, "R7", {node(g, "R6"), node(g, "R5")})));
  CHECK(tree_from_key("1,3,2,4,6,5,5,6,5", g) == euclid());
  CHECK_THROWS_AS(tree_from_key("1,3", g), Error);
  CHECK_THROWS_AS(tree_from_key("5,5", g), Error);
}

TEST_CASE("keys are collision-free and expressions round-trip for all small toy trees") {
  const Grammar& g = toy_solution();
  std::set<std::string> keys;
  std::size_t total = 0;
  for (int size = 1; size <= 5; ++size) {
    for (const ProgramTree& t : all_trees(g, g.start(), size)) {
      ++total;
      CHECK(tree_size(t) == size);
      keys.insert(canonical_key(t));
      Expr e = tree_to_expr(t, g);
      Expr back = parse_expr(render(e));
      REQUIRE_MESSAGE(expr_equal(e, back), render(e));
      CHECK(tree_from_expr(back, g) == t);
    }
  }
  CHECK(keys.size() == total);
  CHECK(total > 10000);
}

TEST_CASE("tree log-probability") {
  const Grammar& g = toy_solution();
  std::vector<double> uniform(16, 1.0 / 16);
  ContextDistribution flat = [&](const Context&) { return std::span<const double>(uniform); };
  CHECK(tree_log_probability(node(g, "R5"), flat) == doctest::Approx(std::log(1.0 / 16)));
  CHECK(tree_log_probability(euclid(), flat) == doctest::Approx(9 * std::log(1.0 / 16)));

  std::vector<double> no_mod = uniform;
  no_mod[static_cast<std::size_t>(g.find_rule("R4"))] = 0.0;
  ContextDistribution holed = [&](const Context&) { return std::span<const double>(no_mod); };
  CHECK(std::isinf(tree_log_probability(euclid(), holed)));

  // additivity: the root factor plus the log-probabilities of each subtree
  // computed in its own context
  std::vector<double> skew(16);
  for (int i = 0; i < 16; ++i) skew[static_cast<std::size_t>(i)] = (i + 1) / 136.0;
  std::vector<double> skew_child(16);
  for (int i = 0; i < 16; ++i) skew_child[static_cast<std::size_t>(i)] = (16 - i) / 136.0;
  ContextDistribution ctx_dep = [&](const Context& c) {
    return std::span<const double>(c.is_root() || c.child_index == 0 ? skew : skew_child);
  };
  ProgramTree t = euclid();
  double whole = tree_log_probability(t, ctx_dep);
  double parts = std::log(skew[0]);
  parts += tree_log_probability(t.children[0], [&](const Context& c) {
    return std::span<const double>(c.is_root() || c.child_index == 0 ? skew : skew_child);
  });
  CHECK(whole == doctest::Approx(parts));
}

TEST_CASE("context walk") {
  std::vector<Context> seen;
  for_each_node(euclid(), [&](const ProgramTree&, const Context& c) { seen.push_back(c); });
  REQUIRE(seen.size() == 9);
  CHECK(seen[0].is_root());
  CHECK(seen[1] == Context{0, 0});
  CHECK(seen[2] == Context{2, 0});  // R3 is rule id 2
  CHECK(seen[7] == Context{2, 1});
}

TEST_CASE("validation") {
  const Grammar& g = toy_problem();
  ProgramTree gcd = tree_from_source("ntprog(lambda m, n, y: (-mod(m, y) or (-mod(n, y) or y)))", g);
  CHECK_NOTHROW(validate_tree(gcd, g));
  CHECK(tree_size(gcd) == 13);
  CHECK_THROWS_AS(validate_tree(gcd, g, -1, 10), Error);
  CHECK_THROWS_AS(validate_tree(gcd.children[0], g), Error);  // Obj is not the start symbol
  CHECK_THROWS_AS(tree_from_source("ntprog(lambda m, n, y: (m + n))", g), Error);
}

TEST_CASE("grammar file errors") {
  CHECK_THROWS_AS(parse_grammar("rule A S -> S | call neg"), Error);  // never terminates
  CHECK_THROWS_AS(parse_grammar("rule A S -> T | call neg\nrule B S -> | int 1"), Error);  // T has no rules
  CHECK_THROWS_AS(parse_grammar("rule A S -> | frobnicate"), Error);
  CHECK_THROWS_AS(parse_grammar("rule A S -> S | call mod\nrule B S -> | int 1"), Error);  // arity
  CHECK_THROWS_AS(parse_grammar("rule A S -> | int 1\nrule A S -> | int 2"), Error);
  CHECK_THROWS_AS(load_grammar("/nonexistent/file.grammar"), Error);
  Grammar g = parse_grammar("rule A S -> S S | call add\nrule B S -> | int 1");
  CHECK(g.rule(0).display == "($0 + $1)");
  CHECK(g.min_size(0) == 1);
}

TEST_CASE("text form round-trips and hashes are stable") {
  const Grammar& g = toy_solution();
  Grammar again = parse_grammar(g.to_text());
  CHECK(again.hash() == g.hash());
  CHECK(again.to_text() == g.to_text());
  CHECK(toy_problem().hash() != g.hash());
}

TEST_CASE("merging grammars") {
  Grammar nt = load_grammar(grammar_path("number_theory_solution.grammar"));
  Grammar st = load_grammar(grammar_path("strings_solution.grammar"));
  Grammar u = merge_grammars("union", {&nt, &st});
  CHECK(u.size() < nt.size() + st.size());  // upper() is shared
  for (const Grammar* part : {&nt, &st}) {
    auto map = rule_mapping(*part, u);
    for (int id : map) CHECK(id >= 0);
    ProgramTree t = tree_from_source(part == &nt ? "rec(lambda m, n: mod(m, n))" : "lambda x: max(x)", *part);
    ProgramTree mapped = remap_tree(t, map);
    CHECK_NOTHROW(validate_tree(mapped, u));
    CHECK(render(tree_to_expr(mapped, u)) == render(tree_to_expr(t, *part)));
  }
}
