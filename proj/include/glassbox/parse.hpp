#pragma once

#include <string_view>

#include "glassbox/expr.hpp"

namespace glassbox {

// Reads the surface syntax produced by render(). Python-flavoured: infix
// arithmetic and comparisons, `a if c else b`, `or`/`and`/`not`, lambdas,
// `rec(lambda ...)`, `callrec(...)`, list/tuple/set displays, single-`for`
// list comprehensions, `x[i]`, `x.method` and `max(xs, key=f)`.
// Throws Error with a position on malformed input.
Expr parse_expr(std::string_view source);

}  // namespace glassbox
