// Builtin registry: the operators, math functions, string functions and
// collection helpers available to both problem and solution programs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "glassbox/interp.hpp"

namespace glassbox {

namespace {

using Args = std::span<const Value>;

Value type_error() { return Value::bottom(BottomReason::TypeError); }
Value arith_error() { return Value::bottom(BottomReason::ArithmeticError); }
Value budget_error() { return Value::bottom(BottomReason::BudgetExhausted); }

bool both_ints(const Value& a, const Value& b) {
  return (a.is_int() || a.is_bool()) && (b.is_int() || b.is_bool());
}

Value checked_float(double d) {
  if (!std::isfinite(d)) return arith_error();
  return Value(d);
}

ValueVec concat(const ValueVec& a, const ValueVec& b) {
  ValueVec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// ----- arithmetic -----------------------------------------------------------

Value b_add(Interpreter& in, Args a) {
  const Value &x = a[0], &y = a[1];
  if (both_ints(x, y)) {
    std::int64_t r;
    if (__builtin_add_overflow(x.to_int(), y.to_int(), &r)) return arith_error();
    return Value(r);
  }
  if (x.is_number() && y.is_number()) return checked_float(x.to_double() + y.to_double());
  if (x.is_str() && y.is_str()) {
    if (!in.charge(static_cast<std::int64_t>(x.as_str().size() + y.as_str().size()))) {
      return budget_error();
    }
    return Value(x.as_str() + y.as_str());
  }
  if (x.kind() == y.kind() && (x.kind() == Value::Kind::List || x.kind() == Value::Kind::Tuple)) {
    if (!in.charge(static_cast<std::int64_t>(x.items().size() + y.items().size()))) {
      return budget_error();
    }
    auto items = concat(x.items(), y.items());
    return x.kind() == Value::Kind::List ? Value::list(std::move(items))
                                         : Value::tuple(std::move(items));
  }
  return type_error();
}

Value b_sub(Interpreter& in, Args a) {
  const Value &x = a[0], &y = a[1];
  if (both_ints(x, y)) {
    std::int64_t r;
    if (__builtin_sub_overflow(x.to_int(), y.to_int(), &r)) return arith_error();
    return Value(r);
  }
  if (x.is_number() && y.is_number()) return checked_float(x.to_double() - y.to_double());
  if (x.kind() == Value::Kind::Set && y.kind() == Value::Kind::Set) {
    if (!in.charge(static_cast<std::int64_t>(x.items().size() + y.items().size()))) {
      return budget_error();
    }
    ValueVec out;
    for (const auto& v : x.items()) {
      bool found = std::any_of(y.items().begin(), y.items().end(),
                               [&](const Value& w) { return total_order(v, w) == 0; });
      if (!found) out.push_back(v);
    }
    return Value::set(std::move(out));
  }
  return type_error();
}

Value repeat(Interpreter& in, const Value& seq, std::int64_t times) {
  times = std::max<std::int64_t>(times, 0);
  std::int64_t unit = seq.is_str() ? static_cast<std::int64_t>(seq.as_str().size())
                                   : static_cast<std::int64_t>(seq.items().size());
  std::int64_t total;
  if (__builtin_mul_overflow(unit, times, &total)) return budget_error();
  if (!in.charge(total)) return budget_error();
  if (seq.is_str()) {
    std::string out;
    out.reserve(static_cast<std::size_t>(total));
    for (std::int64_t i = 0; i < times; ++i) out += seq.as_str();
    return Value(std::move(out));
  }
  ValueVec out;
  out.reserve(static_cast<std::size_t>(total));
  for (std::int64_t i = 0; i < times; ++i) out.insert(out.end(), seq.items().begin(), seq.items().end());
  return seq.kind() == Value::Kind::List ? Value::list(std::move(out)) : Value::tuple(std::move(out));
}

Value b_mul(Interpreter& in, Args a) {
  const Value &x = a[0], &y = a[1];
  if (both_ints(x, y)) {
    std::int64_t r;
    if (__builtin_mul_overflow(x.to_int(), y.to_int(), &r)) return arith_error();
    return Value(r);
  }
  if (x.is_number() && y.is_number()) return checked_float(x.to_double() * y.to_double());
  auto sequence = [](const Value& v) {
    return v.is_str() || v.kind() == Value::Kind::List || v.kind() == Value::Kind::Tuple;
  };
  if (sequence(x) && (y.is_int() || y.is_bool())) return repeat(in, x, y.to_int());
  if (sequence(y) && (x.is_int() || x.is_bool())) return repeat(in, y, x.to_int());
  return type_error();
}

Value b_div(Interpreter&, Args a) {
  const Value &x = a[0], &y = a[1];
  if (!x.is_number() || !y.is_number()) return type_error();
  double d = y.to_double();
  if (d == 0.0) return arith_error();
  return checked_float(x.to_double() / d);
}

// Python's floored modulo, extended with mod(x, 0) = x.
Value b_mod(Interpreter&, Args a) {
  const Value &x = a[0], &y = a[1];
  if (both_ints(x, y)) {
    std::int64_t p = x.to_int(), q = y.to_int();
    if (q == 0) return Value(p);
    if (q == -1) return Value(std::int64_t{0});
    std::int64_t r = p % q;
    if (r != 0 && ((r < 0) != (q < 0))) r += q;
    return Value(r);
  }
  if (x.is_number() && y.is_number()) {
    double p = x.to_double(), q = y.to_double();
    if (q == 0.0) return checked_float(p);
    double r = std::fmod(p, q);
    if (r != 0.0 && ((r < 0) != (q < 0))) r += q;
    return checked_float(r);
  }
  return type_error();
}

Value b_neg(Interpreter&, Args a) {
  const Value& x = a[0];
  if (x.is_int() || x.is_bool()) {
    if (x.to_int() == std::numeric_limits<std::int64_t>::min()) return arith_error();
    return Value(-x.to_int());
  }
  if (x.is_float()) return Value(-x.as_float());
  return type_error();
}

Value b_abs(Interpreter&, Args a) {
  const Value& x = a[0];
  if (x.is_int() || x.is_bool()) {
    if (x.to_int() == std::numeric_limits<std::int64_t>::min()) return arith_error();
    return Value(std::abs(x.to_int()));
  }
  if (x.is_float()) return Value(std::fabs(x.as_float()));
  return type_error();
}

Value b_pow(Interpreter&, Args a) {
  const Value &x = a[0], &y = a[1];
  if (!x.is_number() || !y.is_number()) return type_error();
  if (both_ints(x, y) && y.to_int() >= 0) {
    std::int64_t base = x.to_int(), e = y.to_int(), r = 1;
    while (e > 0) {
      if (e & 1) {
        if (__builtin_mul_overflow(r, base, &r)) return arith_error();
      }
      e >>= 1;
      if (e > 0 && __builtin_mul_overflow(base, base, &base)) return arith_error();
    }
    return Value(r);
  }
  double b = x.to_double(), e = y.to_double();
  if (b == 0.0 && e < 0) return arith_error();
  if (b < 0 && std::floor(e) != e) return arith_error();
  return checked_float(std::pow(b, e));
}

template <double (*F)(double)>
Value unary_math(Interpreter&, Args a) {
  if (!a[0].is_number()) return type_error();
  return checked_float(F(a[0].to_double()));
}

double f_exp(double x) { return std::exp(x); }
double f_tan(double x) { return std::tan(x); }
double f_tanh(double x) { return std::tanh(x); }
double f_arctan(double x) { return std::atan(x); }

Value b_log(Interpreter&, Args a) {
  if (!a[0].is_number()) return type_error();
  double x = a[0].to_double();
  if (x <= 0) return arith_error();
  return checked_float(std::log(x));
}

Value b_sqrt(Interpreter&, Args a) {
  if (!a[0].is_number()) return type_error();
  double x = a[0].to_double();
  if (x < 0) return arith_error();
  return checked_float(std::sqrt(x));
}

Value b_arctanh(Interpreter&, Args a) {
  if (!a[0].is_number()) return type_error();
  double x = a[0].to_double();
  if (!(x > -1.0 && x < 1.0)) return arith_error();
  return checked_float(std::atanh(x));
}

// ----- comparison -----------------------------------------------------------

// Returns -2 when the operands are not ordered with respect to each other.
int ordered_compare(const Value& x, const Value& y) {
  if (x.is_number() && y.is_number()) return total_order(x, y);
  if (x.is_str() && y.is_str()) return total_order(x, y);
  if (x.kind() == y.kind() && (x.kind() == Value::Kind::List || x.kind() == Value::Kind::Tuple)) {
    const auto &p = x.items(), &q = y.items();
    for (std::size_t i = 0; i < std::min(p.size(), q.size()); ++i) {
      if (p[i].equals(q[i])) continue;
      return ordered_compare(p[i], q[i]);
    }
    return p.size() < q.size() ? -1 : (p.size() > q.size() ? 1 : 0);
  }
  return -2;
}

template <bool (*Pred)(int)>
Value compare_op(Interpreter&, Args a) {
  int c = ordered_compare(a[0], a[1]);
  if (c == -2) return type_error();
  return Value(Pred(c));
}

bool p_lt(int c) { return c < 0; }
bool p_le(int c) { return c <= 0; }
bool p_gt(int c) { return c > 0; }
bool p_ge(int c) { return c >= 0; }

Value b_eq(Interpreter&, Args a) { return Value(a[0].equals(a[1])); }
Value b_ne(Interpreter&, Args a) { return Value(!a[0].equals(a[1])); }
Value b_not(Interpreter&, Args a) { return Value(!a[0].truthy()); }

// ----- strings --------------------------------------------------------------

Value b_startswith(Interpreter& in, Args a) {
  if (!a[0].is_str() || !a[1].is_str()) return type_error();
  if (!in.charge(static_cast<std::int64_t>(a[1].as_str().size()))) return budget_error();
  return Value(a[0].as_str().starts_with(a[1].as_str()));
}

Value b_endswith(Interpreter& in, Args a) {
  if (!a[0].is_str() || !a[1].is_str()) return type_error();
  if (!in.charge(static_cast<std::int64_t>(a[1].as_str().size()))) return budget_error();
  return Value(a[0].as_str().ends_with(a[1].as_str()));
}

// str.count (non-overlapping) or list/tuple.count.
Value b_count(Interpreter& in, Args a) {
  const Value &hay = a[0], &needle = a[1];
  if (hay.is_str()) {
    if (!needle.is_str()) return type_error();
    const std::string &s = hay.as_str(), &t = needle.as_str();
    if (!in.charge(static_cast<std::int64_t>(s.size()))) return budget_error();
    if (t.empty()) return Value(static_cast<std::int64_t>(s.size() + 1));
    std::int64_t n = 0;
    for (std::size_t pos = s.find(t); pos != std::string::npos; pos = s.find(t, pos + t.size())) ++n;
    return Value(n);
  }
  if (hay.kind() == Value::Kind::List || hay.kind() == Value::Kind::Tuple) {
    if (!in.charge(static_cast<std::int64_t>(hay.items().size()))) return budget_error();
    std::int64_t n = std::count_if(hay.items().begin(), hay.items().end(),
                                   [&](const Value& v) { return v.equals(needle); });
    return Value(n);
  }
  return type_error();
}

template <int (*F)(int)>
Value map_chars(Interpreter& in, Args a) {
  if (!a[0].is_str()) return type_error();
  std::string s = a[0].as_str();
  if (!in.charge(static_cast<std::int64_t>(s.size()))) return budget_error();
  for (char& c : s) c = static_cast<char>(F(static_cast<unsigned char>(c)));
  return Value(std::move(s));
}

int to_upper(int c) { return (c >= 'a' && c <= 'z') ? c - 32 : c; }
int to_lower(int c) { return (c >= 'A' && c <= 'Z') ? c + 32 : c; }

Value b_ord(Interpreter&, Args a) {
  if (!a[0].is_str() || a[0].as_str().size() != 1) return type_error();
  return Value(static_cast<std::int64_t>(static_cast<unsigned char>(a[0].as_str()[0])));
}

Value b_chr(Interpreter&, Args a) {
  if (!(a[0].is_int() || a[0].is_bool())) return type_error();
  std::int64_t c = a[0].to_int();
  if (c < 0 || c > 127) return arith_error();
  return Value(std::string(1, static_cast<char>(c)));
}

// ----- collections ----------------------------------------------------------

// Elements of an iterable: collection items or single-character strings.
bool elements(Interpreter& in, const Value& v, ValueVec& out) {
  if (v.is_collection()) {
    if (!in.charge(static_cast<std::int64_t>(v.items().size()))) return false;
    out = v.items();
    return true;
  }
  if (v.is_str()) {
    if (!in.charge(static_cast<std::int64_t>(v.as_str().size()))) return false;
    out.clear();
    for (char c : v.as_str()) out.emplace_back(std::string(1, c));
    return true;
  }
  return false;
}

Value iter_error(const Value& v) {
  if (v.is_collection() || v.is_str()) return budget_error();
  return type_error();
}

Value b_len(Interpreter&, Args a) {
  if (a[0].is_str()) return Value(static_cast<std::int64_t>(a[0].as_str().size()));
  if (a[0].is_collection()) return Value(static_cast<std::int64_t>(a[0].items().size()));
  return type_error();
}

Value b_set(Interpreter& in, Args a) {
  if (a.empty()) return Value::set({});
  ValueVec xs;
  if (!elements(in, a[0], xs)) return iter_error(a[0]);
  return Value::set(std::move(xs));
}

Value b_list(Interpreter& in, Args a) {
  if (a.empty()) return Value::list({});
  ValueVec xs;
  if (!elements(in, a[0], xs)) return iter_error(a[0]);
  return Value::list(std::move(xs));
}

Value b_sorted(Interpreter& in, Args a) {
  ValueVec xs;
  if (!elements(in, a[0], xs)) return iter_error(a[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (ordered_compare(xs[0], xs[i]) == -2) return type_error();
  }
  std::stable_sort(xs.begin(), xs.end(),
                   [](const Value& p, const Value& q) { return ordered_compare(p, q) < 0; });
  return Value::list(std::move(xs));
}

Value b_sum(Interpreter& in, Args a) {
  ValueVec xs;
  if (!elements(in, a[0], xs)) return iter_error(a[0]);
  Value acc(std::int64_t{0});
  for (const auto& x : xs) {
    Value pair[2] = {acc, x};
    acc = b_add(in, pair);
    if (acc.is_bottom()) return acc;
    if (!acc.is_number()) return type_error();
  }
  return acc;
}

Value b_range(Interpreter& in, Args a) {
  std::int64_t lo = 0, hi = 0;
  for (const auto& v : a) {
    if (!(v.is_int() || v.is_bool())) return type_error();
  }
  if (a.size() == 1) {
    hi = a[0].to_int();
  } else {
    lo = a[0].to_int();
    hi = a[1].to_int();
  }
  std::int64_t n = hi > lo ? hi - lo : 0;
  if (n < 0 || !in.charge(n)) return budget_error();
  ValueVec xs;
  xs.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = lo; i < hi; ++i) xs.emplace_back(i);
  return Value::list(std::move(xs));
}

Value b_getitem(Interpreter&, Args a) {
  const Value &seq = a[0], &idx = a[1];
  if (!(idx.is_int() || idx.is_bool())) return type_error();
  std::int64_t n;
  if (seq.is_str()) {
    n = static_cast<std::int64_t>(seq.as_str().size());
  } else if (seq.kind() == Value::Kind::List || seq.kind() == Value::Kind::Tuple) {
    n = static_cast<std::int64_t>(seq.items().size());
  } else {
    return type_error();
  }
  std::int64_t i = idx.to_int();
  if (i < 0) i += n;
  if (i < 0 || i >= n) return type_error();
  if (seq.is_str()) return Value(std::string(1, seq.as_str()[static_cast<std::size_t>(i)]));
  return seq.items()[static_cast<std::size_t>(i)];
}

// max/min over two comparable values or over one non-empty iterable. Ties keep
// the first candidate, as Python does.
template <bool Max>
Value extremum(Interpreter& in, Args a) {
  ValueVec xs;
  if (a.size() == 1) {
    if (!elements(in, a[0], xs)) return iter_error(a[0]);
  } else {
    xs.assign(a.begin(), a.end());
  }
  if (xs.empty()) return arith_error();
  std::size_t best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    int c = ordered_compare(xs[i], xs[best]);
    if (c == -2) return type_error();
    if (Max ? c > 0 : c < 0) best = i;
  }
  return xs[best];
}

template <bool Max>
Value extremum_by_key(Interpreter& in, Args a) {
  ValueVec xs;
  if (!elements(in, a[0], xs)) return iter_error(a[0]);
  if (xs.empty()) return arith_error();
  std::size_t best = 0;
  Value best_key;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Value k = in.apply(a[1], std::span<const Value>(&xs[i], 1));
    if (k.is_bottom()) return k;
    if (i == 0) {
      best_key = std::move(k);
      continue;
    }
    int c = ordered_compare(k, best_key);
    if (c == -2) return type_error();
    if (Max ? c > 0 : c < 0) {
      best = i;
      best_key = std::move(k);
    }
  }
  return xs[best];
}

// sum1(lo, hi, f) = f(lo) + ... + f(hi).
Value b_sum1(Interpreter& in, Args a) {
  if (!(a[0].is_int() || a[0].is_bool()) || !(a[1].is_int() || a[1].is_bool())) return type_error();
  if (!a[2].is_closure()) return type_error();
  Value acc(std::int64_t{0});
  for (std::int64_t i = a[0].to_int(); i <= a[1].to_int(); ++i) {
    if (!in.charge(1)) return budget_error();
    Value iv(i);
    Value term = in.apply(a[2], std::span<const Value>(&iv, 1));
    if (term.is_bottom()) return term;
    if (!term.is_number()) return type_error();
    Value pair[2] = {acc, term};
    acc = b_add(in, pair);
    if (acc.is_bottom()) return acc;
  }
  return acc;
}

// Marks the scoring harness at the root of a problem program; evaluates to the
// scoring function itself. The scorer module gives each harness its meaning.
Value b_harness(Interpreter&, Args a) { return a[0]; }

std::map<std::string, Builtin, std::less<>> make_registry() {
  std::map<std::string, Builtin, std::less<>> r;
  auto add = [&](std::string name, int lo, int hi, BuiltinFn fn, std::string infix = {},
                 std::string keyword_of = {}) {
    Builtin b{name, lo, hi, fn, std::move(infix), std::move(keyword_of)};
    r.emplace(std::move(name), std::move(b));
  };
  add("add", 2, 2, b_add, "+");
  add("sub", 2, 2, b_sub, "-");
  add("mul", 2, 2, b_mul, "*");
  add("div", 2, 2, b_div, "/");
  add("mod", 2, 2, b_mod);
  add("neg", 1, 1, b_neg);
  add("abs", 1, 1, b_abs);
  add("pow", 2, 2, b_pow);
  add("log", 1, 1, b_log);
  add("exp", 1, 1, unary_math<f_exp>);
  add("sqrt", 1, 1, b_sqrt);
  add("tan", 1, 1, unary_math<f_tan>);
  add("tanh", 1, 1, unary_math<f_tanh>);
  add("arctan", 1, 1, unary_math<f_arctan>);
  add("arctanh", 1, 1, b_arctanh);
  add("lt", 2, 2, compare_op<p_lt>, "<");
  add("le", 2, 2, compare_op<p_le>, "<=");
  add("gt", 2, 2, compare_op<p_gt>, ">");
  add("ge", 2, 2, compare_op<p_ge>, ">=");
  add("eq", 2, 2, b_eq, "==");
  add("ne", 2, 2, b_ne, "!=");
  add("not", 1, 1, b_not);
  add("startswith", 2, 2, b_startswith);
  add("endswith", 2, 2, b_endswith);
  add("count", 2, 2, b_count);
  add("upper", 1, 1, map_chars<to_upper>);
  add("lower", 1, 1, map_chars<to_lower>);
  add("ord", 1, 1, b_ord);
  add("chr", 1, 1, b_chr);
  add("len", 1, 1, b_len);
  add("set", 0, 1, b_set);
  add("list", 0, 1, b_list);
  add("sorted", 1, 1, b_sorted);
  add("sum", 1, 1, b_sum);
  add("range", 1, 2, b_range);
  add("getitem", 2, 2, b_getitem);
  add("max", 1, 2, extremum<true>);
  add("min", 1, 2, extremum<false>);
  add("max_key", 2, 2, extremum_by_key<true>, {}, "max");
  add("min_key", 2, 2, extremum_by_key<false>, {}, "min");
  add("sum1", 3, 3, b_sum1);
  for (const char* h : {"ntprog", "ntprog1", "strprog", "rootprog", "sumprog"}) {
    add(h, 1, 1, b_harness);
  }
  return r;
}

const std::map<std::string, Builtin, std::less<>>& registry() {
  static const auto r = make_registry();
  return r;
}

}  // namespace

const Builtin* find_builtin(std::string_view name) {
  const auto& r = registry();
  auto it = r.find(name);
  return it == r.end() ? nullptr : &it->second;
}

const Builtin* find_infix_builtin(std::string_view symbol) {
  for (const auto& [name, b] : registry()) {
    if (b.infix == symbol) return &b;
  }
  return nullptr;
}

const Builtin* find_keyword_builtin(std::string_view base_name) {
  for (const auto& [name, b] : registry()) {
    if (b.keyword_of == base_name) return &b;
  }
  return nullptr;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& [name, b] : registry()) out.push_back(name);
  return out;
}

}  // namespace glassbox
