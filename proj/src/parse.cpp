#include "glassbox/parse.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include "glassbox/error.hpp"
#include "glassbox/interp.hpp"

namespace glassbox {

namespace {

enum class Tok { Ident, Int, Float, Str, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) {
    throw Error("parse error at " + std::to_string(i) + ": " + msg);
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      bool is_float = false;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < src.size() && src[i] == '.' && i + 1 < src.size() &&
          std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
        is_float = true;
        ++i;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          is_float = true;
          i = j;
          while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
        }
      }
      out.push_back({is_float ? Tok::Float : Tok::Int, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (c == '\'' || c == '"') {
      char q = c;
      std::string s;
      ++i;
      while (i < src.size() && src[i] != q) {
        if (src[i] == '\\' && i + 1 < src.size()) ++i;
        s += src[i++];
      }
      if (i >= src.size()) fail("unterminated string");
      ++i;
      out.push_back({Tok::Str, std::move(s), start});
      continue;
    }
    static const char* two_char[] = {"<=", ">=", "==", "!="};
    bool matched = false;
    for (const char* op : two_char) {
      if (src.substr(i, 2) == op) {
        out.push_back({Tok::Punct, op, start});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("()[]{},:.=+-*/<>").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), start});
      ++i;
      continue;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

bool is_keyword(const std::string& s) {
  return s == "lambda" || s == "if" || s == "else" || s == "for" || s == "in" || s == "or" ||
         s == "and" || s == "not" || s == "True" || s == "False";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  Expr parse_all() {
    Expr e = expr();
    if (peek().kind != Tok::End) fail("trailing input '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  bool at(const char* punct_or_kw) const {
    const Token& t = peek();
    return (t.kind == Tok::Punct || t.kind == Tok::Ident) && t.text == punct_or_kw;
  }

  bool accept(const char* s) {
    if (!at(s)) return false;
    ++pos_;
    return true;
  }

  void expect(const char* s) {
    if (!accept(s)) fail(std::string("expected '") + s + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("parse error at " + std::to_string(peek().pos) + ": " + msg);
  }

  std::string ident() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || is_keyword(t.text)) fail("expected identifier");
    return next().text;
  }

  std::vector<std::string> params_until_colon() {
    std::vector<std::string> ps;
    if (!at(":")) {
      ps.push_back(ident());
      while (accept(",")) ps.push_back(ident());
    }
    expect(":");
    return ps;
  }

  Expr expr() {
    if (accept("lambda")) {
      auto ps = params_until_colon();
      return make_lambda(std::move(ps), expr());
    }
    Expr e = disjunction();
    if (accept("if")) {
      Expr cond = disjunction();
      expect("else");
      Expr other = expr();
      return make_if(std::move(e), std::move(cond), std::move(other));
    }
    return e;
  }

  Expr disjunction() {
    Expr e = conjunction();
    while (accept("or")) e = make_or(std::move(e), conjunction());
    return e;
  }

  Expr conjunction() {
    Expr e = negation();
    while (accept("and")) e = make_and(std::move(e), negation());
    return e;
  }

  Expr negation() {
    if (accept("not")) return make_call("not", {negation()});
    return comparison();
  }

  Expr comparison() {
    Expr e = additive();
    for (const char* op : {"<", "<=", ">", ">=", "==", "!="}) {
      if (accept(op)) return make_call(find_infix_builtin(op)->name, {std::move(e), additive()});
    }
    return e;
  }

  Expr additive() {
    Expr e = multiplicative();
    for (;;) {
      if (accept("+")) {
        e = make_call("add", {std::move(e), multiplicative()});
      } else if (accept("-")) {
        e = make_call("sub", {std::move(e), multiplicative()});
      } else {
        return e;
      }
    }
  }

  Expr multiplicative() {
    Expr e = unary();
    for (;;) {
      if (accept("*")) {
        e = make_call("mul", {std::move(e), unary()});
      } else if (accept("/")) {
        e = make_call("div", {std::move(e), unary()});
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept("-")) {
      // A minus glued to a numeric literal is a negative constant.
      const Token& t = peek();
      if (t.kind == Tok::Int || t.kind == Tok::Float) {
        Expr lit = number(next());
        return postfix(make_const(negate(lit->constant)));
      }
      return make_call("neg", {unary()});
    }
    return postfix(primary());
  }

  static Value negate(const Value& v) {
    if (v.is_int()) return Value(-v.as_int());
    return Value(-v.as_float());
  }

  Expr number(const Token& t) {
    if (t.kind == Tok::Int) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc()) fail("integer literal out of range");
      return make_const(Value(v));
    }
    return make_const(Value(std::stod(t.text)));
  }

  Expr postfix(Expr e) {
    for (;;) {
      if (accept(".")) {
        std::string name = ident();
        if (!find_builtin(name)) fail("unknown method '" + name + "'");
        if (accept("(")) {
          // recv.f(args) is sugar for f(recv, args)
          auto args = call_args(nullptr, nullptr);
          args.insert(args.begin(), std::move(e));
          e = make_call(name, std::move(args));
        } else {
          e = make_method(name, std::move(e));
        }
      } else if (accept("[")) {
        Expr idx = expr();
        expect("]");
        e = make_call("getitem", {std::move(e), std::move(idx)});
      } else {
        return e;
      }
    }
  }

  std::vector<Expr> call_args(std::string* keyword, Expr* keyword_value) {
    std::vector<Expr> args;
    if (accept(")")) return args;
    for (;;) {
      if (keyword && peek().kind == Tok::Ident && peek(1).kind == Tok::Punct && peek(1).text == "=") {
        *keyword = next().text;
        next();
        *keyword_value = expr();
      } else {
        args.push_back(expr());
      }
      if (accept(")")) return args;
      expect(",");
    }
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int:
      case Tok::Float: return number(next());
      case Tok::Str: return make_const(Value(next().text));
      case Tok::End: fail("unexpected end of input");
      case Tok::Ident: return identifier_form();
      case Tok::Punct: break;
    }
    if (accept("(")) {
      if (accept(")")) return make_tuple({});
      Expr first = expr();
      if (accept(")")) return first;
      std::vector<Expr> items{std::move(first)};
      while (accept(",")) {
        if (at(")")) break;
        items.push_back(expr());
      }
      expect(")");
      return make_tuple(std::move(items));
    }
    if (accept("[")) {
      if (accept("]")) return make_list({});
      Expr first = expr();
      if (accept("for")) {
        std::string var = ident();
        expect("in");
        Expr iterable = disjunction();
        expect("]");
        return make_comprehension(std::move(var), std::move(first), std::move(iterable));
      }
      std::vector<Expr> items{std::move(first)};
      while (accept(",")) {
        if (at("]")) break;
        items.push_back(expr());
      }
      expect("]");
      return make_list(std::move(items));
    }
    if (accept("{")) {
      std::vector<Expr> items;
      if (!accept("}")) {
        items.push_back(expr());
        while (accept(",")) {
          if (at("}")) break;
          items.push_back(expr());
        }
        expect("}");
      }
      return make_set(std::move(items));
    }
    fail("unexpected '" + t.text + "'");
  }

  Expr identifier_form() {
    if (accept("True")) return make_const(Value(true));
    if (accept("False")) return make_const(Value(false));
    std::string name = ident();
    if (!accept("(")) return make_var(std::move(name));
    if (name == "rec") {
      expect("lambda");
      auto ps = params_until_colon();
      Expr body = expr();
      expect(")");
      return make_rec(std::move(ps), std::move(body));
    }
    if (name == "callrec") return make_callrec(call_args(nullptr, nullptr));
    std::string keyword;
    Expr keyword_value;
    auto args = call_args(&keyword, &keyword_value);
    if (!keyword.empty()) {
      const Builtin* b = find_keyword_builtin(name);
      if (keyword != "key" || !b || args.size() != 1) fail("unsupported keyword call to " + name);
      args.push_back(std::move(keyword_value));
      return make_call(b->name, std::move(args));
    }
    if (!find_builtin(name)) fail("unknown function '" + name + "'");
    return make_call(name, std::move(args));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view source) { return Parser(source).parse_all(); }

}  // namespace glassbox
