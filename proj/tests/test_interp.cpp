#include <cmath>

#include "doctest.h"
#include "glassbox/error.hpp"
#include "glassbox/interp.hpp"
#include "glassbox/parse.hpp"

using namespace glassbox;

namespace {

Value run(std::string_view src, EvalBudget budget = {}) { return eval(parse_expr(src), budget); }

Value call2(std::string_view fn_src, Value a, Value b) {
  EvalBudget budget;
  Interpreter in(budget);
  Value f = in.eval(parse_expr(fn_src), nullptr);
  ValueVec args{std::move(a), std::move(b)};
  return in.apply(f, args);
}

}  // namespace

TEST_CASE("arithmetic builtins") {
  CHECK(run("mod(10, 4)").as_int() == 2);
  CHECK(run("mod(-7, 3)").as_int() == 2);  // floored, like Python
  CHECK(run("mod(7, 0)").as_int() == 7);
  CHECK(run("(2 + 3) * 4").as_int() == 20);
  CHECK(run("7 / 2").as_float() == doctest::Approx(3.5));
  CHECK(run("-(3)").as_int() == -3);
}

TEST_CASE("strings") {
  CHECK(run("count('BUBQJ', 'B')").as_int() == 2);
  CHECK(run("'ab' + 'cd'").as_str() == "abcd");
  CHECK(run("upper('aBc')").as_str() == "ABC");
  CHECK(run("'ABBA'.count('B')").as_int() == 2);
  CHECK(run("max('BUBQJ', key='BUBQJ'.count)").as_str() == "B");
}

TEST_CASE("errors become Bottom with a reason") {
  Value v = run("lower(1)");
  REQUIRE(v.is_bottom());
  CHECK(v.bottom_reason() == BottomReason::TypeError);
  v = run("log(0)");
  REQUIRE(v.is_bottom());
  CHECK(v.bottom_reason() == BottomReason::ArithmeticError);
  CHECK(run("x").bottom_reason() == BottomReason::TypeError);
  CHECK(run("callrec(1)").bottom_reason() == BottomReason::TypeError);
}

TEST_CASE("euclid via rec") {
  const char* gcd = "rec(lambda m, n: (callrec(mod(n, m), m) if n else m))";
  CHECK(call2(gcd, Value(std::int64_t{12}), Value(std::int64_t{8})).as_int() == 4);
  CHECK(call2(gcd, Value(std::int64_t{7}), Value(std::int64_t{5})).as_int() == 1);
  CHECK(call2(gcd, Value(std::int64_t{18}), Value(std::int64_t{12})).as_int() == 6);
}

TEST_CASE("runaway recursion stops at the budget") {
  const char* loop = "rec(lambda m, n: callrec(m, n))";
  Value v = call2(loop, Value(std::int64_t{1}), Value(std::int64_t{1}));
  REQUIRE(v.is_bottom());
  bool stopped = v.bottom_reason() == BottomReason::RecursionLimit ||
                 v.bottom_reason() == BottomReason::BudgetExhausted;
  CHECK(stopped);
}

TEST_CASE("step budget is monotone") {
  const char* src = "sum([i * i for i in range(1, 50)])";
  Value small = run(src, EvalBudget(20, 100));
  Value big = run(src, EvalBudget(100000, 100));
  CHECK(small.is_bottom());
  CHECK(big.as_int() == 40425);
  Value bigger = run(src, EvalBudget(1000000, 100));
  CHECK(identical(big, bigger));
}

TEST_CASE("evaluation is deterministic") {
  const char* src = "sorted(set([mod(i * 7, 5) for i in range(20)]))";
  CHECK(identical(run(src), run(src)));
}

TEST_CASE("free variables") {
  CHECK(free_variables(parse_expr("lambda m, n: mod(m, y)")) == std::set<std::string>{"y"});
  CHECK(free_variables(parse_expr("[i + j for i in range(n)]")) == std::set<std::string>{"j", "n"});
  CHECK(free_variables(parse_expr("rec(lambda n: callrec(n))")).empty());
  CHECK(well_formed(parse_expr("lambda x: x")));
  CHECK_FALSE(well_formed(parse_expr("callrec(1)")));
}

TEST_CASE("render and parse round-trip") {
  for (const char* src : {
           "lambda m, n, y: (-mod(m, y) or (-mod(n, y) or y))",
           "rec(lambda m, n: (callrec(mod(n, m), m) if n else m))",
           "lambda x: max(x, key=x.count)",
           "[(i * 2) for i in range(1, 5)]",
           "lambda x: (x[0] + x[-1])",
           "{1, 2}",
           "(1,)",
           "-(-x)",
       }) {
    Expr e = parse_expr(src);
    Expr again = parse_expr(render(e));
    CHECK_MESSAGE(expr_equal(e, again), render(e));
    CHECK(render(again) == render(e));
  }
  CHECK(render(parse_expr("lambda m, n, y: -mod(m, y) or (-mod(n, y) or y)")) ==
        "lambda m, n, y: (-mod(m, y) or (-mod(n, y) or y))");
  CHECK_THROWS_AS(parse_expr("frobnicate(1)"), Error);
  CHECK_THROWS_AS(parse_expr("mod(1)"), Error);
}
