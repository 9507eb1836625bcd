#include "glassbox/grammar.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "glassbox/error.hpp"
#include "glassbox/interp.hpp"
#include "glassbox/parse.hpp"

namespace glassbox {

namespace {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error("bad integer '" + s + "'");
  return v;
}

std::string format_double(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

constexpr int kUnbounded = std::numeric_limits<int>::max();

}  // namespace

// ---------------------------------------------------------------------------
// Builder

std::string Builder::spec() const {
  auto join_params = [&](std::string head) {
    for (const auto& p : params) head += " " + p;
    return head;
  };
  switch (kind) {
    case Kind::Call: return "call " + name;
    case Kind::Var: return "var " + name;
    case Kind::Const:
      switch (constant.kind()) {
        case Value::Kind::Int: return "int " + std::to_string(constant.as_int());
        case Value::Kind::Float: return "float " + format_double(constant.as_float());
        case Value::Kind::Bool: return constant.as_bool() ? "bool true" : "bool false";
        case Value::Kind::Str: return "str " + constant.as_str();
        default: throw Error("unsupported rule constant " + repr(constant));
      }
    case Kind::Lambda: return join_params("lambda");
    case Kind::Rec: return join_params("rec");
    case Kind::CallRec: return "callrec";
    case Kind::If: return "if";
    case Kind::Or: return "or";
    case Kind::And: return "and";
    case Kind::List: return "list";
    case Kind::Tuple: return "tuple";
    case Kind::Set: return "set";
    case Kind::Comp: return "comp " + name;
    case Kind::Method: return "method " + name;
    case Kind::Index: return "index " + std::to_string(constant.as_int());
  }
  return "";
}

Builder Builder::parse(std::string_view spec) {
  auto words = split_ws(spec);
  if (words.empty()) throw Error("empty builder");
  const std::string& head = words[0];
  auto one_arg = [&]() -> const std::string& {
    if (words.size() != 2) throw Error("builder '" + head + "' takes one argument");
    return words[1];
  };
  auto no_args = [&] {
    if (words.size() != 1) throw Error("builder '" + head + "' takes no arguments");
  };
  Builder b;
  if (head == "call") {
    b.kind = Kind::Call;
    b.name = one_arg();
    if (!find_builtin(b.name)) throw Error("unknown builtin '" + b.name + "'");
  } else if (head == "var") {
    b.kind = Kind::Var;
    b.name = one_arg();
  } else if (head == "int") {
    b.constant = Value(parse_int(one_arg()));
  } else if (head == "float") {
    b.constant = Value(std::stod(one_arg()));
  } else if (head == "str") {
    if (words.size() > 2) throw Error("string constants cannot contain spaces");
    b.constant = Value(words.size() == 2 ? words[1] : std::string());
  } else if (head == "bool") {
    const std::string& v = one_arg();
    if (v != "true" && v != "false") throw Error("bool builder takes true or false");
    b.constant = Value(v == "true");
  } else if (head == "lambda" || head == "rec") {
    b.kind = head == "rec" ? Kind::Rec : Kind::Lambda;
    b.params.assign(words.begin() + 1, words.end());
  } else if (head == "comp") {
    b.kind = Kind::Comp;
    b.name = one_arg();
  } else if (head == "method") {
    b.kind = Kind::Method;
    b.name = one_arg();
    if (!find_builtin(b.name)) throw Error("unknown builtin '" + b.name + "'");
  } else if (head == "index") {
    b.kind = Kind::Index;
    b.constant = Value(parse_int(one_arg()));
  } else {
    static const std::map<std::string, Kind, std::less<>> bare = {
        {"callrec", Kind::CallRec}, {"if", Kind::If},       {"or", Kind::Or},   {"and", Kind::And},
        {"list", Kind::List},       {"tuple", Kind::Tuple}, {"set", Kind::Set},
    };
    auto it = bare.find(head);
    if (it == bare.end()) throw Error("unknown builder '" + head + "'");
    no_args();
    b.kind = it->second;
  }
  return b;
}

std::pair<int, int> Builder::arity_range() const {
  switch (kind) {
    case Kind::Call: {
      const Builtin* fn = find_builtin(name);
      return {fn->min_arity, fn->max_arity};
    }
    case Kind::Var:
    case Kind::Const: return {0, 0};
    case Kind::Lambda:
    case Kind::Rec:
    case Kind::Method:
    case Kind::Index: return {1, 1};
    case Kind::If: return {3, 3};
    case Kind::Or:
    case Kind::And:
    case Kind::Comp: return {2, 2};
    case Kind::CallRec:
    case Kind::List:
    case Kind::Tuple:
    case Kind::Set: return {0, kUnbounded};
  }
  return {0, 0};
}

Expr Builder::build(std::vector<Expr> c) const {
  switch (kind) {
    case Kind::Call: return make_call(name, std::move(c));
    case Kind::Var: return make_var(name);
    case Kind::Const: return make_const(constant);
    case Kind::Lambda: return make_lambda(params, std::move(c[0]));
    case Kind::Rec: return make_rec(params, std::move(c[0]));
    case Kind::CallRec: return make_callrec(std::move(c));
    case Kind::If: return make_if(std::move(c[0]), std::move(c[1]), std::move(c[2]));
    case Kind::Or: return make_or(std::move(c[0]), std::move(c[1]));
    case Kind::And: return make_and(std::move(c[0]), std::move(c[1]));
    case Kind::List: return make_list(std::move(c));
    case Kind::Tuple: return make_tuple(std::move(c));
    case Kind::Set: return make_set(std::move(c));
    case Kind::Comp: return make_comprehension(name, std::move(c[0]), std::move(c[1]));
    case Kind::Method: return make_method(name, std::move(c[0]));
    case Kind::Index: return make_call("getitem", {std::move(c[0]), make_const(constant)});
  }
  throw Error("unknown builder kind");
}

// ---------------------------------------------------------------------------
// Grammar

Grammar::Grammar(std::string name, std::vector<std::string> nonterminals, std::vector<Rule> rules, int start)
    : name_(std::move(name)), nonterminals_(std::move(nonterminals)), rules_(std::move(rules)), start_(start) {
  const int n_nt = static_cast<int>(nonterminals_.size());
  if (start_ < 0 || start_ >= n_nt) throw Error("grammar " + name_ + ": bad start symbol");
  by_lhs_.assign(nonterminals_.size(), {});
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    Rule& r = rules_[i];
    r.id = static_cast<int>(i);
    if (r.lhs < 0 || r.lhs >= n_nt) throw Error("grammar " + name_ + ": rule " + r.label + " has bad lhs");
    for (int c : r.children) {
      if (c < 0 || c >= n_nt) throw Error("grammar " + name_ + ": rule " + r.label + " has bad child");
    }
    auto [lo, hi] = r.builder.arity_range();
    if (r.arity() < lo || r.arity() > hi) {
      throw Error("grammar " + name_ + ": rule " + r.label + " has arity " + std::to_string(r.arity()) +
                  " but builder '" + r.builder.spec() + "' needs " + std::to_string(lo) + ".." +
                  (hi == kUnbounded ? std::string("*") : std::to_string(hi)));
    }
    by_lhs_[static_cast<std::size_t>(r.lhs)].push_back(r.id);
    max_arity_ = std::max(max_arity_, r.arity());
  }
  for (int nt = 0; nt < n_nt; ++nt) {
    if (by_lhs_[static_cast<std::size_t>(nt)].empty()) {
      throw Error("grammar " + name_ + ": nonterminal " + nonterminals_[static_cast<std::size_t>(nt)] +
                  " has no rules");
    }
  }
  // Least fixed point of min_size(A) = min over A-rules of 1 + sum of child minima.
  min_size_.assign(nonterminals_.size(), kUnbounded);
  for (bool changed = true; changed;) {
    changed = false;
    for (const Rule& r : rules_) {
      long long total = 1;
      for (int c : r.children) total += min_size_[static_cast<std::size_t>(c)];
      if (total < min_size_[static_cast<std::size_t>(r.lhs)]) {
        min_size_[static_cast<std::size_t>(r.lhs)] = static_cast<int>(total);
        changed = true;
      }
    }
  }
  for (int nt = 0; nt < n_nt; ++nt) {
    if (min_size_[static_cast<std::size_t>(nt)] == kUnbounded) {
      throw Error("grammar " + name_ + ": nonterminal " + nonterminals_[static_cast<std::size_t>(nt)] +
                  " derives no finite tree");
    }
  }
}

int Grammar::find_nonterminal(std::string_view name) const {
  for (std::size_t i = 0; i < nonterminals_.size(); ++i) {
    if (nonterminals_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int Grammar::find_rule(std::string_view label) const {
  for (const Rule& r : rules_) {
    if (r.label == label) return r.id;
  }
  return -1;
}

std::string Grammar::rule_signature(int id) const {
  const Rule& r = rule(id);
  std::string s = nonterminal_name(r.lhs) + " ->";
  for (int c : r.children) s += " " + nonterminal_name(c);
  return s + " | " + r.builder.spec();
}

std::uint64_t Grammar::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  feed(nonterminal_name(start_));
  for (const Rule& r : rules_) feed(rule_signature(r.id));
  return h;
}

std::string Grammar::to_text() const {
  std::ostringstream out;
  out << "grammar " << name_ << "\n";
  out << "start " << nonterminal_name(start_) << "\n";
  for (const Rule& r : rules_) {
    out << "rule " << r.label << " " << nonterminal_name(r.lhs) << " ->";
    for (int c : r.children) out << " " << nonterminal_name(c);
    out << " | " << r.builder.spec() << " | " << r.display << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// File format

Grammar parse_grammar(std::string_view text, std::string_view origin) {
  std::string name(origin);
  std::string start_name;
  std::vector<std::string> nts;
  auto nt_id = [&](const std::string& n) {
    for (std::size_t i = 0; i < nts.size(); ++i) {
      if (nts[i] == n) return static_cast<int>(i);
    }
    nts.push_back(n);
    return static_cast<int>(nts.size() - 1);
  };
  std::vector<Rule> rules;
  std::map<std::string, int> labels;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto where = [&] { return std::string(origin) + ":" + std::to_string(line_no) + ": "; };
    try {
      auto words = split_ws(line);
      if (words[0] == "grammar") {
        if (words.size() != 2) throw Error("expected 'grammar <name>'");
        name = words[1];
      } else if (words[0] == "start") {
        if (words.size() != 2) throw Error("expected 'start <nonterminal>'");
        start_name = words[1];
      } else if (words[0] == "rule") {
        std::size_t bar1 = line.find('|');
        if (bar1 == std::string_view::npos) throw Error("rule needs '| <builder>'");
        std::size_t bar2 = line.find('|', bar1 + 1);
        auto head = split_ws(line.substr(0, bar1));
        std::string_view builder_text =
            line.substr(bar1 + 1, (bar2 == std::string_view::npos ? line.size() : bar2) - bar1 - 1);
        std::string display =
            bar2 == std::string_view::npos ? std::string() : std::string(trim(line.substr(bar2 + 1)));
        if (head.size() < 4 || head[3] != "->") throw Error("expected 'rule <label> <LHS> -> ...'");
        Rule r;
        r.label = head[1];
        if (!labels.emplace(r.label, static_cast<int>(rules.size())).second) {
          throw Error("duplicate rule label " + r.label);
        }
        r.lhs = nt_id(head[2]);
        for (std::size_t i = 4; i < head.size(); ++i) r.children.push_back(nt_id(head[i]));
        r.builder = Builder::parse(builder_text);
        if (display.empty()) {
          std::vector<Expr> holes;
          for (int i = 0; i < r.arity(); ++i) holes.push_back(make_var("$" + std::to_string(i)));
          auto [lo, hi] = r.builder.arity_range();
          if (r.arity() >= lo && r.arity() <= hi) display = render(r.builder.build(std::move(holes)));
        }
        r.display = std::move(display);
        if (rules.empty() && start_name.empty()) start_name = head[2];
        rules.push_back(std::move(r));
      } else {
        throw Error("unknown directive '" + words[0] + "'");
      }
    } catch (const Error& e) {
      throw Error(where() + e.what());
    }
  }
  if (rules.empty()) throw Error(std::string(origin) + ": grammar has no rules");
  int start = -1;
  for (std::size_t i = 0; i < nts.size(); ++i) {
    if (nts[i] == start_name) start = static_cast<int>(i);
  }
  if (start < 0) throw Error(std::string(origin) + ": start symbol " + start_name + " is never used");
  return Grammar(std::move(name), std::move(nts), std::move(rules), start);
}

Grammar load_grammar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open grammar file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grammar(buf.str(), path);
}

Grammar merge_grammars(const std::string& name, const std::vector<const Grammar*>& parts) {
  if (parts.empty()) throw Error("merge_grammars: nothing to merge");
  std::vector<std::string> nts;
  auto nt_id = [&](const std::string& n) {
    for (std::size_t i = 0; i < nts.size(); ++i) {
      if (nts[i] == n) return static_cast<int>(i);
    }
    nts.push_back(n);
    return static_cast<int>(nts.size() - 1);
  };
  for (const std::string& n : parts.front()->nonterminals()) nt_id(n);
  std::vector<Rule> rules;
  std::map<std::string, int> seen;
  std::map<std::string, int> labels;
  for (const Grammar* g : parts) {
    for (const Rule& r : g->rules()) {
      if (seen.count(g->rule_signature(r.id))) continue;
      seen.emplace(g->rule_signature(r.id), static_cast<int>(rules.size()));
      Rule copy = r;
      copy.lhs = nt_id(g->nonterminal_name(r.lhs));
      for (int& c : copy.children) c = nt_id(g->nonterminal_name(c));
      if (labels.count(copy.label)) copy.label = g->name() + "." + copy.label;
      labels.emplace(copy.label, 0);
      rules.push_back(std::move(copy));
    }
  }
  int start = nt_id(parts.front()->nonterminal_name(parts.front()->start()));
  return Grammar(name, std::move(nts), std::move(rules), start);
}

std::vector<int> rule_mapping(const Grammar& from, const Grammar& to) {
  std::unordered_map<std::string, int> index;
  for (const Rule& r : to.rules()) index.emplace(to.rule_signature(r.id), r.id);
  std::vector<int> out;
  out.reserve(from.rules().size());
  for (const Rule& r : from.rules()) {
    auto it = index.find(from.rule_signature(r.id));
    out.push_back(it == index.end() ? -1 : it->second);
  }
  return out;
}

ProgramTree remap_tree(const ProgramTree& tree, const std::vector<int>& mapping) {
  ProgramTree out;
  int mapped = mapping.at(static_cast<std::size_t>(tree.rule));
  if (mapped < 0) throw Error("remap_tree: rule has no counterpart");
  out.rule = mapped;
  out.children.reserve(tree.children.size());
  for (const auto& c : tree.children) out.children.push_back(remap_tree(c, mapping));
  return out;
}

// ---------------------------------------------------------------------------
// Trees

namespace {

int validate_rec(const ProgramTree& t, const Grammar& g, int nt) {
  if (t.rule < 0 || t.rule >= g.size()) throw Error("tree uses unknown rule id " + std::to_string(t.rule));
  const Rule& r = g.rule(t.rule);
  if (r.lhs != nt) {
    throw Error("rule " + r.label + " cannot expand " + g.nonterminal_name(nt));
  }
  if (static_cast<int>(t.children.size()) != r.arity()) {
    throw Error("rule " + r.label + " expects " + std::to_string(r.arity()) + " children, got " +
                std::to_string(t.children.size()));
  }
  int size = 1;
  for (std::size_t i = 0; i < t.children.size(); ++i) size += validate_rec(t.children[i], g, r.children[i]);
  return size;
}

void preorder_into(const ProgramTree& t, std::vector<int>& out) {
  out.push_back(t.rule);
  for (const auto& c : t.children) preorder_into(c, out);
}

ProgramTree from_preorder(const std::vector<int>& seq, std::size_t& i, const Grammar& g) {
  if (i >= seq.size()) throw Error("key ends before the tree is complete");
  ProgramTree t;
  t.rule = seq[i++];
  if (t.rule < 0 || t.rule >= g.size()) throw Error("key names unknown rule ordinal " + std::to_string(t.rule + 1));
  int arity = g.rule(t.rule).arity();
  t.children.reserve(static_cast<std::size_t>(arity));
  for (int k = 0; k < arity; ++k) t.children.push_back(from_preorder(seq, i, g));
  return t;
}

std::optional<ProgramTree> match(const Expr& e, const Grammar& g, int nt, int depth);

bool match_children(const std::vector<Expr>& es, const Rule& r, const Grammar& g, ProgramTree& out, int depth) {
  if (es.size() != r.children.size()) return false;
  for (std::size_t i = 0; i < es.size(); ++i) {
    auto c = match(es[i], g, r.children[i], depth + 1);
    if (!c) return false;
    out.children.push_back(std::move(*c));
  }
  return true;
}

bool builder_matches(const Builder& b, const ExprNode& e) {
  using K = Builder::Kind;
  switch (b.kind) {
    case K::Call: return e.kind == ExprKind::Call && e.builtin->name == b.name;
    case K::Var: return e.kind == ExprKind::Var && e.name == b.name;
    case K::Const: return e.kind == ExprKind::Const && identical(e.constant, b.constant);
    case K::Lambda: return e.kind == ExprKind::Lambda && e.params == b.params;
    case K::Rec: return e.kind == ExprKind::Rec && e.params == b.params;
    case K::CallRec: return e.kind == ExprKind::CallRec;
    case K::If: return e.kind == ExprKind::If;
    case K::Or: return e.kind == ExprKind::Or;
    case K::And: return e.kind == ExprKind::And;
    case K::List: return e.kind == ExprKind::MakeList;
    case K::Tuple: return e.kind == ExprKind::MakeTuple;
    case K::Set: return e.kind == ExprKind::MakeSet;
    case K::Comp: return e.kind == ExprKind::Comprehension && e.name == b.name;
    case K::Method: return e.kind == ExprKind::Method && e.builtin->name == b.name;
    case K::Index:
      return e.kind == ExprKind::Call && e.builtin->name == "getitem" &&
             e.children[1]->kind == ExprKind::Const && identical(e.children[1]->constant, b.constant);
  }
  return false;
}

std::optional<ProgramTree> match(const Expr& e, const Grammar& g, int nt, int depth) {
  if (!e || depth > 200) return std::nullopt;
  for (int id : g.rules_for(nt)) {
    const Rule& r = g.rule(id);
    if (!builder_matches(r.builder, *e)) continue;
    ProgramTree t;
    t.rule = id;
    std::vector<Expr> kids = e->children;
    if (r.builder.kind == Builder::Kind::Index) kids.resize(1);
    if (match_children(kids, r, g, t, depth)) return t;
  }
  return std::nullopt;
}

void visit(const ProgramTree& t, const Context& ctx,
           const std::function<void(const ProgramTree&, const Context&)>& fn) {
  fn(t, ctx);
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    visit(t.children[i], Context{t.rule, static_cast<int>(i)}, fn);
  }
}

}  // namespace

void validate_tree(const ProgramTree& tree, const Grammar& g, int nonterminal, int size_cap) {
  int size = validate_rec(tree, g, nonterminal < 0 ? g.start() : nonterminal);
  if (size_cap > 0 && size > size_cap) {
    throw Error("tree has " + std::to_string(size) + " nodes, cap is " + std::to_string(size_cap));
  }
}

Expr tree_to_expr(const ProgramTree& tree, const Grammar& g) {
  if (tree.rule < 0 || tree.rule >= g.size()) throw Error("tree uses unknown rule id " + std::to_string(tree.rule));
  const Rule& r = g.rule(tree.rule);
  if (static_cast<int>(tree.children.size()) != r.arity()) {
    throw Error("rule " + r.label + " expects " + std::to_string(r.arity()) + " children");
  }
  std::vector<Expr> kids;
  kids.reserve(tree.children.size());
  for (std::size_t i = 0; i < tree.children.size(); ++i) {
    if (g.rule(tree.children[i].rule).lhs != r.children[i]) {
      throw Error("child " + std::to_string(i) + " of rule " + r.label + " has the wrong nonterminal");
    }
    kids.push_back(tree_to_expr(tree.children[i], g));
  }
  return r.builder.build(std::move(kids));
}

int tree_size(const ProgramTree& tree) {
  int n = 1;
  for (const auto& c : tree.children) n += tree_size(c);
  return n;
}

std::vector<int> preorder_rules(const ProgramTree& tree) {
  std::vector<int> out;
  preorder_into(tree, out);
  return out;
}

std::string canonical_key(const ProgramTree& tree) {
  std::string key;
  for (int id : preorder_rules(tree)) {
    if (!key.empty()) key += ',';
    key += std::to_string(id + 1);
  }
  return key;
}

ProgramTree tree_from_key(std::string_view key, const Grammar& g) {
  std::vector<int> seq;
  std::size_t pos = 0;
  while (pos <= key.size()) {
    std::size_t comma = std::min(key.find(',', pos), key.size());
    seq.push_back(static_cast<int>(parse_int(std::string(trim(key.substr(pos, comma - pos))))) - 1);
    pos = comma + 1;
  }
  std::size_t i = 0;
  ProgramTree t = from_preorder(seq, i, g);
  if (i != seq.size()) throw Error("key has trailing rules after the tree is complete");
  validate_tree(t, g, g.rule(t.rule).lhs);
  return t;
}

ProgramTree tree_from_expr(const Expr& e, const Grammar& g, int nt) {
  auto t = match(e, g, nt < 0 ? g.start() : nt, 0);
  if (!t) throw Error("grammar " + g.name() + " cannot derive " + render(e));
  return *t;
}

ProgramTree tree_from_source(std::string_view source, const Grammar& g, int nt) {
  return tree_from_expr(parse_expr(source), g, nt);
}

namespace {

// Whether text has a space outside any brackets or quotes, i.e. is an operator
// expression that needs parentheses when embedded in another one.
bool loose(const std::string& text) {
  int depth = 0;
  char quote = 0;
  for (char c : text) {
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '(' || c == '[' || c == '{') {
      ++depth;
    } else if (c == ')' || c == ']' || c == '}') {
      --depth;
    } else if (c == ' ' && depth == 0) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::string display_tree(const ProgramTree& tree, const Grammar& g) {
  const Rule& r = g.rule(tree.rule);
  std::string out;
  const std::string& tpl = r.display;
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    if (tpl[i] == '$' && i + 1 < tpl.size() && std::isdigit(static_cast<unsigned char>(tpl[i + 1]))) {
      std::size_t k = 0;
      std::size_t j = i + 1;
      while (j < tpl.size() && std::isdigit(static_cast<unsigned char>(tpl[j]))) k = k * 10 + static_cast<std::size_t>(tpl[j++] - '0');
      std::string child = k < tree.children.size() ? display_tree(tree.children[k], g) : "?";
      // A slot set off by brackets, commas or a lambda colon needs no parentheses.
      std::size_t before = tpl.find_last_not_of(' ', i == 0 ? std::string::npos : i - 1);
      bool open = i == 0 || before == std::string::npos || std::string_view("([{,:").find(tpl[before]) != std::string_view::npos;
      std::size_t after = tpl.find_first_not_of(' ', j);
      bool close = after == std::string::npos || std::string_view(")]},").find(tpl[after]) != std::string_view::npos;
      if (!(open && close) && loose(child)) child = "(" + child + ")";
      out += child;
      i = j - 1;
    } else {
      out += tpl[i];
    }
  }
  return out;
}

double tree_log_probability(const ProgramTree& tree, const ContextDistribution& probs) {
  double total = 0.0;
  visit(tree, Context::root(), [&](const ProgramTree& node, const Context& ctx) {
    double p = probs(ctx)[static_cast<std::size_t>(node.rule)];
    total += p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  });
  return total;
}

void for_each_node(const ProgramTree& tree,
                   const std::function<void(const ProgramTree&, const Context&)>& fn) {
  visit(tree, Context::root(), fn);
}

}  // namespace glassbox
