#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "glassbox/value.hpp"

namespace glassbox {

struct Builtin;

enum class ExprKind : std::uint8_t {
  Const,
  Var,
  Call,           // builtin application
  Lambda,
  Rec,            // recursive function introduction
  CallRec,        // call of the innermost enclosing Rec
  If,             // children: then, cond, else
  Or,
  And,
  MakeList,
  MakeTuple,
  MakeSet,
  Comprehension,  // children: body, iterable; name: loop variable
  Method,         // children: receiver; builtin bound to receiver
};

struct ExprNode {
  ExprKind kind = ExprKind::Const;
  Value constant;
  std::string name;                 // Var name, Comprehension variable
  const Builtin* builtin = nullptr; // Call, Method
  std::vector<std::string> params;  // Lambda, Rec
  std::vector<std::shared_ptr<const ExprNode>> children;
};

using Expr = std::shared_ptr<const ExprNode>;

Expr make_const(Value v);
Expr make_var(std::string name);
// Throws Error if `builtin_name` is not registered.
Expr make_call(const std::string& builtin_name, std::vector<Expr> args);
Expr make_lambda(std::vector<std::string> params, Expr body);
Expr make_rec(std::vector<std::string> params, Expr body);
Expr make_callrec(std::vector<Expr> args);
Expr make_if(Expr then_branch, Expr cond, Expr else_branch);
Expr make_or(Expr a, Expr b);
Expr make_and(Expr a, Expr b);
Expr make_list(std::vector<Expr> items);
Expr make_tuple(std::vector<Expr> items);
Expr make_set(std::vector<Expr> items);
Expr make_comprehension(std::string var, Expr body, Expr iterable);
Expr make_method(const std::string& builtin_name, Expr receiver);

bool expr_equal(const Expr& a, const Expr& b);

// Names referenced but not bound by an enclosing lambda, rec or comprehension.
std::set<std::string> free_variables(const Expr& e);

// Structural well-formedness: no free variables and every callrec sits inside
// a rec body. Evaluation of ill-formed expressions is still defined (Bottom).
bool well_formed(const Expr& e);

// Debug renderer producing the surface syntax read back by parse_expr.
std::string render(const Expr& e);

}  // namespace glassbox
