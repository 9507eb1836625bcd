#include "glassbox/value.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "glassbox/interp.hpp"

namespace glassbox {

std::string_view to_string(BottomReason reason) {
  switch (reason) {
    case BottomReason::TypeError: return "type-error";
    case BottomReason::BudgetExhausted: return "budget-exhausted";
    case BottomReason::RecursionLimit: return "recursion-limit";
    case BottomReason::ArithmeticError: return "arithmetic-error";
    case BottomReason::ArityError: return "arity-error";
  }
  return "unknown";
}

std::size_t ClosureData::arity() const {
  if (bound_builtin) {
    return static_cast<std::size_t>(bound_builtin->min_arity) - bound_args.size();
  }
  return params.size();
}

Value Value::list(ValueVec items) {
  return Value(List{std::make_shared<const ValueVec>(std::move(items))});
}

Value Value::tuple(ValueVec items) {
  return Value(Tuple{std::make_shared<const ValueVec>(std::move(items))});
}

Value Value::set(ValueVec items) {
  std::sort(items.begin(), items.end(),
            [](const Value& a, const Value& b) { return total_order(a, b) < 0; });
  items.erase(std::unique(items.begin(), items.end(),
                          [](const Value& a, const Value& b) { return total_order(a, b) == 0; }),
              items.end());
  return Value(Set{std::make_shared<const ValueVec>(std::move(items))});
}

const ValueVec& Value::items() const {
  switch (kind()) {
    case Kind::List: return *std::get<List>(v_).items;
    case Kind::Tuple: return *std::get<Tuple>(v_).items;
    case Kind::Set: return *std::get<Set>(v_).items;
    default: break;
  }
  static const ValueVec empty;
  return empty;
}

double Value::to_double() const {
  switch (kind()) {
    case Kind::Int: return static_cast<double>(as_int());
    case Kind::Float: return as_float();
    case Kind::Bool: return as_bool() ? 1.0 : 0.0;
    default: return 0.0;
  }
}

std::int64_t Value::to_int() const {
  if (is_bool()) return as_bool() ? 1 : 0;
  return as_int();
}

bool Value::truthy() const {
  switch (kind()) {
    case Kind::Bottom: return false;
    case Kind::Int: return as_int() != 0;
    case Kind::Float: return as_float() != 0.0;
    case Kind::Bool: return as_bool();
    case Kind::Str: return !as_str().empty();
    case Kind::List:
    case Kind::Tuple:
    case Kind::Set: return !items().empty();
    case Kind::Closure: return true;
  }
  return false;
}

namespace {

int kind_rank(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Int:
    case Value::Kind::Float:
    case Value::Kind::Bool: return 0;
    case Value::Kind::Str: return 1;
    case Value::Kind::List: return 2;
    case Value::Kind::Tuple: return 3;
    case Value::Kind::Set: return 4;
    case Value::Kind::Closure: return 5;
    case Value::Kind::Bottom: return 6;
  }
  return 6;
}

int compare_numbers(const Value& a, const Value& b) {
  if (!a.is_float() && !b.is_float()) {
    auto x = a.to_int(), y = b.to_int();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  double x = a.to_double(), y = b.to_double();
  return x < y ? -1 : (x > y ? 1 : 0);
}

int compare_seq(const ValueVec& a, const ValueVec& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = total_order(a[i], b[i]); c != 0) return c;
  }
  return a.size() < b.size() ? -1 : (a.size() > b.size() ? 1 : 0);
}

}  // namespace

int total_order(const Value& a, const Value& b) {
  int ra = kind_rank(a), rb = kind_rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (ra) {
    case 0: return compare_numbers(a, b);
    case 1: return a.as_str().compare(b.as_str()) < 0 ? -1 : (a.as_str() == b.as_str() ? 0 : 1);
    case 2:
    case 3:
    case 4: return compare_seq(a.items(), b.items());
    case 5: {
      auto pa = a.as_closure().data.get(), pb = b.as_closure().data.get();
      return pa < pb ? -1 : (pa > pb ? 1 : 0);
    }
    default: return 0;
  }
}

bool Value::equals(const Value& other) const {
  if (is_bottom() || other.is_bottom()) return false;
  if (kind_rank(*this) != kind_rank(other)) return false;
  if (kind() != other.kind() && is_collection()) return false;
  return total_order(*this, other) == 0;
}

bool identical(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Value::Kind::Bottom: return a.bottom_reason() == b.bottom_reason();
    case Value::Kind::Float: {
      double x = a.as_float(), y = b.as_float();
      return x == y || (std::isnan(x) && std::isnan(y));
    }
    case Value::Kind::List:
    case Value::Kind::Tuple:
    case Value::Kind::Set: {
      const auto& x = a.items();
      const auto& y = b.items();
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!identical(x[i], y[i])) return false;
      }
      return true;
    }
    default: return total_order(a, b) == 0;
  }
}

namespace {

std::string format_float(double d) {
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  if (std::isnan(d)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

std::string join_items(const ValueVec& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += repr(items[i]);
  }
  return out;
}

}  // namespace

std::string repr(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Bottom: return "<bottom:" + std::string(to_string(v.bottom_reason())) + ">";
    case Value::Kind::Int: return std::to_string(v.as_int());
    case Value::Kind::Float: return format_float(v.as_float());
    case Value::Kind::Bool: return v.as_bool() ? "True" : "False";
    case Value::Kind::Str: return quote(v.as_str());
    case Value::Kind::List: return "[" + join_items(v.items()) + "]";
    case Value::Kind::Tuple:
      return v.items().size() == 1 ? "(" + repr(v.items()[0]) + ",)"
                                   : "(" + join_items(v.items()) + ")";
    case Value::Kind::Set:
      return v.items().empty() ? "set()" : "{" + join_items(v.items()) + "}";
    case Value::Kind::Closure: return "<function>";
  }
  return "?";
}

}  // namespace glassbox
