#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glassbox/expr.hpp"
#include "glassbox/value.hpp"

namespace glassbox {

// Deterministic replacement for a wall-clock timeout. Both counters only go
// down; evaluation yields Bottom once either one is exhausted.
struct EvalBudget {
  static constexpr std::int64_t kDefaultSteps = 10'000;
  static constexpr std::int64_t kDefaultRecursionCalls = 100;

  std::int64_t max_steps = kDefaultSteps;
  std::int64_t max_recursion_calls = kDefaultRecursionCalls;
  std::int64_t steps_left = kDefaultSteps;
  std::int64_t recursion_calls_left = kDefaultRecursionCalls;

  EvalBudget() = default;
  EvalBudget(std::int64_t steps, std::int64_t recursion_calls)
      : max_steps(steps),
        max_recursion_calls(recursion_calls),
        steps_left(steps),
        recursion_calls_left(recursion_calls) {}

  // Same limits, counters refilled.
  EvalBudget fresh() const { return EvalBudget(max_steps, max_recursion_calls); }
  std::int64_t steps_used() const { return max_steps - steps_left; }
};

// One lexical scope. `rec_self` is set on frames introduced by applying a
// recursive closure and is what `callrec` resolves to.
struct Frame {
  std::vector<std::string> names;
  ValueVec values;
  Env parent;
  std::shared_ptr<const ClosureData> rec_self;
};

Env bind(Env parent, std::vector<std::string> names, ValueVec values,
         std::shared_ptr<const ClosureData> rec_self = nullptr);

class Interpreter;

using BuiltinFn = Value (*)(Interpreter&, std::span<const Value>);

struct Builtin {
  std::string name;
  int min_arity = 0;
  int max_arity = 0;
  BuiltinFn fn = nullptr;
  // Surface syntax: infix operator ("+", "<", ...) or empty for name(args).
  std::string infix;
  // Rendered as `max(a, key=f)` when set.
  std::string keyword_of;
};

// Returns nullptr if unknown.
const Builtin* find_builtin(std::string_view name);
const Builtin* find_infix_builtin(std::string_view symbol);
const Builtin* find_keyword_builtin(std::string_view base_name);
std::vector<std::string> builtin_names();

// Step-budgeted tree-walking evaluator. Never throws on evaluation errors; every
// failure is a Bottom value. One Interpreter per evaluation; not thread-safe,
// but any number may run concurrently.
class Interpreter {
 public:
  static constexpr int kMaxDepth = 2'000;

  explicit Interpreter(EvalBudget& budget) : budget_(budget) {}

  Value eval(const Expr& e, const Env& env);
  Value apply(const Value& fn, std::span<const Value> args);

  // Charges `n` extra steps for size-proportional builtin work. Returns false
  // (and zeroes the counter) when the budget cannot cover it.
  bool charge(std::int64_t n);

  EvalBudget& budget() { return budget_; }

 private:
  Value eval_node(const ExprNode& e, const Env& env);
  Value apply_closure(const Closure& c, std::span<const Value> args);

  EvalBudget& budget_;
  int depth_ = 0;
};

// Convenience wrapper: evaluate with a copy of `budget` so callers can reuse it.
Value eval(const Expr& expr, const Env& env, EvalBudget budget = {});
Value eval(const Expr& expr, EvalBudget budget = {});

// Apply a registered builtin directly to values (fresh default budget unless
// one is supplied).
Value apply_builtin(std::string_view name, std::span<const Value> args, EvalBudget budget = {});

}  // namespace glassbox
