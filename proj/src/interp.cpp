#include "glassbox/interp.hpp"

namespace glassbox {

Env bind(Env parent, std::vector<std::string> names, ValueVec values,
         std::shared_ptr<const ClosureData> rec_self) {
  auto f = std::make_shared<Frame>();
  f->names = std::move(names);
  f->values = std::move(values);
  f->parent = std::move(parent);
  f->rec_self = std::move(rec_self);
  return f;
}

namespace {

const Value* lookup(const Env& env, const std::string& name) {
  for (const Frame* f = env.get(); f; f = f->parent.get()) {
    for (std::size_t i = 0; i < f->names.size(); ++i) {
      if (f->names[i] == name) return &f->values[i];
    }
  }
  return nullptr;
}

std::shared_ptr<const ClosureData> enclosing_rec(const Env& env) {
  for (const Frame* f = env.get(); f; f = f->parent.get()) {
    if (f->rec_self) return f->rec_self;
  }
  return nullptr;
}

// Elements visited by comprehensions: items of a collection, chars of a string.
bool iterate(const Value& v, ValueVec& out) {
  if (v.is_collection()) {
    out = v.items();
    return true;
  }
  if (v.is_str()) {
    out.clear();
    for (char c : v.as_str()) out.emplace_back(std::string(1, c));
    return true;
  }
  return false;
}

}  // namespace

bool Interpreter::charge(std::int64_t n) {
  if (n <= 0) return true;
  if (budget_.steps_left < n) {
    budget_.steps_left = 0;
    return false;
  }
  budget_.steps_left -= n;
  return true;
}

Value Interpreter::eval(const Expr& e, const Env& env) {
  if (!e) return Value::bottom(BottomReason::TypeError);
  return eval_node(*e, env);
}

Value Interpreter::eval_node(const ExprNode& e, const Env& env) {
  if (!charge(1)) return Value::bottom(BottomReason::BudgetExhausted);
  if (depth_ >= kMaxDepth) return Value::bottom(BottomReason::RecursionLimit);
  struct DepthGuard {
    int& d;
    explicit DepthGuard(int& depth) : d(depth) { ++d; }
    ~DepthGuard() { --d; }
  } guard(depth_);

  switch (e.kind) {
    case ExprKind::Const: return e.constant;

    case ExprKind::Var: {
      const Value* v = lookup(env, e.name);
      return v ? *v : Value::bottom(BottomReason::TypeError);
    }

    case ExprKind::Call: {
      ValueVec args;
      args.reserve(e.children.size());
      for (const auto& c : e.children) {
        Value v = eval_node(*c, env);
        if (v.is_bottom()) return v;
        args.push_back(std::move(v));
      }
      return e.builtin->fn(*this, args);
    }

    case ExprKind::Lambda:
    case ExprKind::Rec: {
      auto data = std::make_shared<ClosureData>();
      data->params = e.params;
      data->body = e.children[0];
      data->env = env;
      data->recursive = e.kind == ExprKind::Rec;
      return Value(Closure{std::move(data)});
    }

    case ExprKind::CallRec: {
      auto self = enclosing_rec(env);
      if (!self) return Value::bottom(BottomReason::TypeError);
      ValueVec args;
      args.reserve(e.children.size());
      for (const auto& c : e.children) {
        Value v = eval_node(*c, env);
        if (v.is_bottom()) return v;
        args.push_back(std::move(v));
      }
      if (budget_.recursion_calls_left <= 0) return Value::bottom(BottomReason::RecursionLimit);
      --budget_.recursion_calls_left;
      return apply_closure(Closure{self}, args);
    }

    case ExprKind::If: {
      Value cond = eval_node(*e.children[1], env);
      if (cond.is_bottom()) return cond;
      return eval_node(*e.children[cond.truthy() ? 0 : 2], env);
    }

    case ExprKind::Or: {
      Value a = eval_node(*e.children[0], env);
      if (a.is_bottom() || a.truthy()) return a;
      return eval_node(*e.children[1], env);
    }

    case ExprKind::And: {
      Value a = eval_node(*e.children[0], env);
      if (a.is_bottom() || !a.truthy()) return a;
      return eval_node(*e.children[1], env);
    }

    case ExprKind::MakeList:
    case ExprKind::MakeTuple:
    case ExprKind::MakeSet: {
      ValueVec items;
      items.reserve(e.children.size());
      for (const auto& c : e.children) {
        Value v = eval_node(*c, env);
        if (v.is_bottom()) return v;
        items.push_back(std::move(v));
      }
      if (e.kind == ExprKind::MakeList) return Value::list(std::move(items));
      if (e.kind == ExprKind::MakeTuple) return Value::tuple(std::move(items));
      return Value::set(std::move(items));
    }

    case ExprKind::Comprehension: {
      Value iterable = eval_node(*e.children[1], env);
      if (iterable.is_bottom()) return iterable;
      ValueVec elems;
      if (!iterate(iterable, elems)) return Value::bottom(BottomReason::TypeError);
      ValueVec out;
      out.reserve(elems.size());
      for (auto& x : elems) {
        Env inner = bind(env, {e.name}, {std::move(x)});
        Value v = eval_node(*e.children[0], inner);
        if (v.is_bottom()) return v;
        out.push_back(std::move(v));
      }
      return Value::list(std::move(out));
    }

    case ExprKind::Method: {
      Value recv = eval_node(*e.children[0], env);
      if (recv.is_bottom()) return recv;
      auto data = std::make_shared<ClosureData>();
      data->bound_builtin = e.builtin;
      data->bound_args = {std::move(recv)};
      return Value(Closure{std::move(data)});
    }
  }
  return Value::bottom(BottomReason::TypeError);
}

Value Interpreter::apply(const Value& fn, std::span<const Value> args) {
  if (fn.is_bottom()) return fn;
  if (!fn.is_closure()) return Value::bottom(BottomReason::TypeError);
  for (const auto& a : args) {
    if (a.is_bottom()) return a;
  }
  return apply_closure(fn.as_closure(), args);
}

Value Interpreter::apply_closure(const Closure& c, std::span<const Value> args) {
  const ClosureData& d = *c.data;
  if (d.bound_builtin) {
    ValueVec all = d.bound_args;
    all.insert(all.end(), args.begin(), args.end());
    int argc = static_cast<int>(all.size());
    if (argc < d.bound_builtin->min_arity || argc > d.bound_builtin->max_arity) {
      return Value::bottom(BottomReason::ArityError);
    }
    if (!charge(1)) return Value::bottom(BottomReason::BudgetExhausted);
    return d.bound_builtin->fn(*this, all);
  }
  if (args.size() != d.params.size()) return Value::bottom(BottomReason::ArityError);
  Env inner = bind(d.env, d.params, ValueVec(args.begin(), args.end()),
                   d.recursive ? c.data : nullptr);
  return eval_node(*d.body, inner);
}

Value eval(const Expr& expr, const Env& env, EvalBudget budget) {
  Interpreter in(budget);
  return in.eval(expr, env);
}

Value eval(const Expr& expr, EvalBudget budget) { return eval(expr, nullptr, budget); }

Value apply_builtin(std::string_view name, std::span<const Value> args, EvalBudget budget) {
  const Builtin* b = find_builtin(name);
  if (!b) return Value::bottom(BottomReason::TypeError);
  int argc = static_cast<int>(args.size());
  if (argc < b->min_arity || argc > b->max_arity) return Value::bottom(BottomReason::ArityError);
  for (const auto& a : args) {
    if (a.is_bottom()) return a;
  }
  Interpreter in(budget);
  if (!in.charge(1)) return Value::bottom(BottomReason::BudgetExhausted);
  return b->fn(in, args);
}

}  // namespace glassbox
