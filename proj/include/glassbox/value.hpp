#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace glassbox {

// Why an evaluation produced no value.
enum class BottomReason : std::uint8_t {
  TypeError,
  BudgetExhausted,
  RecursionLimit,
  ArithmeticError,
  ArityError,
};

std::string_view to_string(BottomReason reason);

struct Bottom {
  BottomReason reason = BottomReason::TypeError;
  bool operator==(const Bottom&) const = default;
};

class Value;
struct ExprNode;
struct Builtin;
struct Frame;

using ValueVec = std::vector<Value>;
using Env = std::shared_ptr<const Frame>;

struct List {
  std::shared_ptr<const ValueVec> items;
};
struct Tuple {
  std::shared_ptr<const ValueVec> items;
};
// Elements are kept sorted (total_order) and unique.
struct Set {
  std::shared_ptr<const ValueVec> items;
};

// Either a user closure (params + body + captured env) or a builtin with some
// leading arguments already bound, as produced by `text.count`.
struct ClosureData {
  std::vector<std::string> params;
  std::shared_ptr<const ExprNode> body;
  Env env;
  bool recursive = false;

  const Builtin* bound_builtin = nullptr;
  ValueVec bound_args;

  std::size_t arity() const;
};

struct Closure {
  std::shared_ptr<const ClosureData> data;
};

// Runtime datum of the expression language. Collections never hold Bottom.
class Value {
 public:
  enum class Kind : std::uint8_t { Bottom, Int, Float, Bool, Str, List, Tuple, Set, Closure };

  Value() : v_(Bottom{}) {}
  Value(Bottom b) : v_(b) {}
  Value(std::int64_t i) : v_(i) {}
  Value(int i) : v_(static_cast<std::int64_t>(i)) {}
  Value(double d) : v_(d) {}
  Value(bool b) : v_(b) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(List l) : v_(std::move(l)) {}
  Value(Tuple t) : v_(std::move(t)) {}
  Value(Set s) : v_(std::move(s)) {}
  Value(Closure c) : v_(std::move(c)) {}

  static Value bottom(BottomReason r) { return Value(Bottom{r}); }
  static Value list(ValueVec items);
  static Value tuple(ValueVec items);
  static Value set(ValueVec items);  // sorts and dedups

  Kind kind() const { return static_cast<Kind>(v_.index()); }
  bool is_bottom() const { return kind() == Kind::Bottom; }
  bool is_int() const { return kind() == Kind::Int; }
  bool is_float() const { return kind() == Kind::Float; }
  bool is_bool() const { return kind() == Kind::Bool; }
  bool is_str() const { return kind() == Kind::Str; }
  bool is_closure() const { return kind() == Kind::Closure; }
  bool is_collection() const {
    return kind() == Kind::List || kind() == Kind::Tuple || kind() == Kind::Set;
  }
  // Int, Float and Bool all take part in arithmetic, as in Python.
  bool is_number() const { return is_int() || is_float() || is_bool(); }

  BottomReason bottom_reason() const { return std::get<Bottom>(v_).reason; }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  double as_float() const { return std::get<double>(v_); }
  bool as_bool() const { return std::get<bool>(v_); }
  const std::string& as_str() const { return std::get<std::string>(v_); }
  const Closure& as_closure() const { return std::get<Closure>(v_); }
  // Items of a list, tuple or set.
  const ValueVec& items() const;

  // Numeric view; requires is_number().
  double to_double() const;
  // Integer view of Int or Bool.
  std::int64_t to_int() const;

  bool truthy() const;

  // Python-style equality: numbers compare by value across Int/Float/Bool.
  bool equals(const Value& other) const;

 private:
  std::variant<Bottom, std::int64_t, double, bool, std::string, List, Tuple, Set, Closure> v_;
};

// Total order used for set canonicalization: numbers first (by value), then
// strings, then lists, tuples, sets, closures (by identity).
int total_order(const Value& a, const Value& b);

// Structural identity (Int 1 and Float 1.0 differ). Used for Expr equality.
bool identical(const Value& a, const Value& b);

std::string repr(const Value& v);

}  // namespace glassbox
