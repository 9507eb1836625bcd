#include "glassbox/expr.hpp"

#include <algorithm>

#include "glassbox/error.hpp"
#include "glassbox/interp.hpp"

namespace glassbox {

namespace {

Expr node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

const Builtin& require_builtin(const std::string& name) {
  const Builtin* b = find_builtin(name);
  if (!b) throw Error("unknown builtin '" + name + "'");
  return *b;
}

}  // namespace

Expr make_const(Value v) {
  ExprNode n;
  n.kind = ExprKind::Const;
  n.constant = std::move(v);
  return node(std::move(n));
}

Expr make_var(std::string name) {
  ExprNode n;
  n.kind = ExprKind::Var;
  n.name = std::move(name);
  return node(std::move(n));
}

Expr make_call(const std::string& builtin_name, std::vector<Expr> args) {
  const Builtin& b = require_builtin(builtin_name);
  int argc = static_cast<int>(args.size());
  if (argc < b.min_arity || argc > b.max_arity) {
    throw Error("builtin '" + builtin_name + "' takes " + std::to_string(b.min_arity) +
                (b.max_arity != b.min_arity ? ".." + std::to_string(b.max_arity) : "") +
                " arguments, got " + std::to_string(argc));
  }
  ExprNode n;
  n.kind = ExprKind::Call;
  n.builtin = &b;
  n.children = std::move(args);
  return node(std::move(n));
}

Expr make_lambda(std::vector<std::string> params, Expr body) {
  ExprNode n;
  n.kind = ExprKind::Lambda;
  n.params = std::move(params);
  n.children = {std::move(body)};
  return node(std::move(n));
}

Expr make_rec(std::vector<std::string> params, Expr body) {
  ExprNode n;
  n.kind = ExprKind::Rec;
  n.params = std::move(params);
  n.children = {std::move(body)};
  return node(std::move(n));
}

Expr make_callrec(std::vector<Expr> args) {
  ExprNode n;
  n.kind = ExprKind::CallRec;
  n.children = std::move(args);
  return node(std::move(n));
}

Expr make_if(Expr then_branch, Expr cond, Expr else_branch) {
  ExprNode n;
  n.kind = ExprKind::If;
  n.children = {std::move(then_branch), std::move(cond), std::move(else_branch)};
  return node(std::move(n));
}

Expr make_or(Expr a, Expr b) {
  ExprNode n;
  n.kind = ExprKind::Or;
  n.children = {std::move(a), std::move(b)};
  return node(std::move(n));
}

Expr make_and(Expr a, Expr b) {
  ExprNode n;
  n.kind = ExprKind::And;
  n.children = {std::move(a), std::move(b)};
  return node(std::move(n));
}

Expr make_list(std::vector<Expr> items) {
  ExprNode n;
  n.kind = ExprKind::MakeList;
  n.children = std::move(items);
  return node(std::move(n));
}

Expr make_tuple(std::vector<Expr> items) {
  ExprNode n;
  n.kind = ExprKind::MakeTuple;
  n.children = std::move(items);
  return node(std::move(n));
}

Expr make_set(std::vector<Expr> items) {
  ExprNode n;
  n.kind = ExprKind::MakeSet;
  n.children = std::move(items);
  return node(std::move(n));
}

Expr make_comprehension(std::string var, Expr body, Expr iterable) {
  ExprNode n;
  n.kind = ExprKind::Comprehension;
  n.name = std::move(var);
  n.children = {std::move(body), std::move(iterable)};
  return node(std::move(n));
}

Expr make_method(const std::string& builtin_name, Expr receiver) {
  const Builtin& b = require_builtin(builtin_name);
  if (b.min_arity < 2) throw Error("builtin '" + builtin_name + "' cannot be bound as a method");
  ExprNode n;
  n.kind = ExprKind::Method;
  n.builtin = &b;
  n.children = {std::move(receiver)};
  return node(std::move(n));
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->name != b->name || a->builtin != b->builtin ||
      a->params != b->params || a->children.size() != b->children.size()) {
    return false;
  }
  if (a->kind == ExprKind::Const && !identical(a->constant, b->constant)) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!expr_equal(a->children[i], b->children[i])) return false;
  }
  return true;
}

namespace {

void collect_free(const ExprNode& e, std::vector<std::string>& bound, std::set<std::string>& out) {
  switch (e.kind) {
    case ExprKind::Var:
      if (std::find(bound.begin(), bound.end(), e.name) == bound.end()) out.insert(e.name);
      return;
    case ExprKind::Lambda:
    case ExprKind::Rec: {
      auto mark = bound.size();
      bound.insert(bound.end(), e.params.begin(), e.params.end());
      collect_free(*e.children[0], bound, out);
      bound.resize(mark);
      return;
    }
    case ExprKind::Comprehension: {
      collect_free(*e.children[1], bound, out);
      bound.push_back(e.name);
      collect_free(*e.children[0], bound, out);
      bound.pop_back();
      return;
    }
    default:
      for (const auto& c : e.children) collect_free(*c, bound, out);
  }
}

bool callrec_scoped(const ExprNode& e, bool inside_rec) {
  if (e.kind == ExprKind::CallRec && !inside_rec) return false;
  bool inner = inside_rec || e.kind == ExprKind::Rec;
  for (const auto& c : e.children) {
    if (!callrec_scoped(*c, inner)) return false;
  }
  return true;
}

}  // namespace

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  collect_free(*e, bound, out);
  return out;
}

bool well_formed(const Expr& e) { return free_variables(e).empty() && callrec_scoped(*e, false); }

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string render_node(const ExprNode& e);

std::string render_join(const std::vector<Expr>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += render_node(*items[i]);
  }
  return out;
}

std::string join_params(const std::vector<std::string>& ps) {
  std::string out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ", ";
    out += ps[i];
  }
  return out;
}

bool is_numeric_const(const ExprNode& e) {
  return e.kind == ExprKind::Const && e.constant.is_number() && !e.constant.is_bool();
}

bool is_neg(const ExprNode& e) {
  return e.kind == ExprKind::Call && e.builtin->name == "neg";
}

// Operands of infix operators, if-expressions and the like. Only bare lambdas
// need protecting since every other low-precedence form renders with parens.
std::string operand(const ExprNode& e) {
  if (e.kind == ExprKind::Lambda) return "(" + render_node(e) + ")";
  return render_node(e);
}

// Receivers of `.method` and `[index]`.
std::string postfix_receiver(const ExprNode& e) {
  bool atomic = false;
  switch (e.kind) {
    case ExprKind::Var:
    case ExprKind::Rec:
    case ExprKind::CallRec:
    case ExprKind::MakeList:
    case ExprKind::MakeTuple:
    case ExprKind::MakeSet:
    case ExprKind::Comprehension:
    case ExprKind::Or:
    case ExprKind::And:
    case ExprKind::If:
    case ExprKind::Method: atomic = true; break;
    case ExprKind::Call: atomic = !is_neg(e); break;
    case ExprKind::Const: atomic = e.constant.is_str() || e.constant.is_bool(); break;
    default: break;
  }
  return atomic ? render_node(e) : "(" + render_node(e) + ")";
}

std::string render_call(const ExprNode& e) {
  const Builtin& b = *e.builtin;
  const auto& args = e.children;
  if (!b.infix.empty() && args.size() == 2) {
    return "(" + operand(*args[0]) + " " + b.infix + " " + operand(*args[1]) + ")";
  }
  if (b.name == "neg") {
    const ExprNode& x = *args[0];
    if (is_numeric_const(x) || is_neg(x)) return "-(" + render_node(x) + ")";
    return "-" + operand(x);
  }
  if (b.name == "not") return "(not " + operand(*args[0]) + ")";
  if (b.name == "getitem") return postfix_receiver(*args[0]) + "[" + render_node(*args[1]) + "]";
  if (!b.keyword_of.empty()) {
    return b.keyword_of + "(" + render_node(*args[0]) + ", key=" + render_node(*args[1]) + ")";
  }
  return b.name + "(" + render_join(args) + ")";
}

std::string render_node(const ExprNode& e) {
  switch (e.kind) {
    case ExprKind::Const: return repr(e.constant);
    case ExprKind::Var: return e.name;
    case ExprKind::Call: return render_call(e);
    case ExprKind::Lambda: return "lambda " + join_params(e.params) + ": " + render_node(*e.children[0]);
    case ExprKind::Rec:
      return "rec(lambda " + join_params(e.params) + ": " + render_node(*e.children[0]) + ")";
    case ExprKind::CallRec: return "callrec(" + render_join(e.children) + ")";
    case ExprKind::If:
      return "(" + operand(*e.children[0]) + " if " + operand(*e.children[1]) + " else " +
             operand(*e.children[2]) + ")";
    case ExprKind::Or: return "(" + operand(*e.children[0]) + " or " + operand(*e.children[1]) + ")";
    case ExprKind::And:
      return "(" + operand(*e.children[0]) + " and " + operand(*e.children[1]) + ")";
    case ExprKind::MakeList: return "[" + render_join(e.children) + "]";
    case ExprKind::MakeTuple:
      if (e.children.size() == 1) return "(" + render_node(*e.children[0]) + ",)";
      return "(" + render_join(e.children) + ")";
    case ExprKind::MakeSet: return "{" + render_join(e.children) + "}";
    case ExprKind::Comprehension:
      return "[" + operand(*e.children[0]) + " for " + e.name + " in " + operand(*e.children[1]) +
             "]";
    case ExprKind::Method: return postfix_receiver(*e.children[0]) + "." + e.builtin->name;
  }
  return "?";
}

}  // namespace

std::string render(const Expr& e) { return render_node(*e); }

}  // namespace glassbox
