#pragma once

// Arithmetic formulas over cell coordinates.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos tan exp log sqrt abs atan2 pow min max.
// Constants: pi. Variables are bound by name when the formula is compiled.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conefield/error.hpp"

namespace conefield {

class Expr {
 public:
  Expr() = default;

  static Expr compile(std::string_view text, std::span<const std::string> variables) {
    Parser p{text, variables, 0, {}};
    Expr e;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("unexpected trailing input");
    e.nodes_ = std::move(p.nodes);
    e.text_ = std::string(text);
    return e;
  }

  double operator()(std::span<const double> vars) const { return eval(root_, vars); }
  const std::string& text() const { return text_; }
  bool valid() const { return !nodes_.empty(); }

 private:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Call };
  enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Atan2, Pow, Min, Max };

  struct Node {
    Op op;
    double value = 0.0;
    int var = -1;
    Fn fn = Fn::Sin;
    std::vector<int> kids;
  };

  struct Parser {
    std::string_view s;
    std::span<const std::string> vars;
    std::size_t pos;
    std::vector<Node> nodes;

    [[noreturn]] void fail(const std::string& what) const {
      throw Error(ErrorCode::SpecParseError,
                  what + " at offset " + std::to_string(pos) + " in \"" + std::string(s) + "\"");
    }
    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    int push(Node n) {
      nodes.push_back(std::move(n));
      return static_cast<int>(nodes.size()) - 1;
    }
    int binary(Op op, int a, int b) { return push(Node{op, 0.0, -1, Fn::Sin, {a, b}}); }

    int parse_expr() {
      int lhs = parse_term();
      for (;;) {
        if (eat('+')) lhs = binary(Op::Add, lhs, parse_term());
        else if (eat('-')) lhs = binary(Op::Sub, lhs, parse_term());
        else return lhs;
      }
    }
    int parse_term() {
      int lhs = parse_unary();
      for (;;) {
        if (eat('*')) lhs = binary(Op::Mul, lhs, parse_unary());
        else if (eat('/')) lhs = binary(Op::Div, lhs, parse_unary());
        else return lhs;
      }
    }
    int parse_unary() {
      if (eat('-')) return push(Node{Op::Neg, 0.0, -1, Fn::Sin, {parse_unary()}});
      if (eat('+')) return parse_unary();
      return parse_power();
    }
    int parse_power() {
      const int base = parse_primary();
      if (eat('^')) return binary(Op::Pow, base, parse_unary());
      return base;
    }
    int parse_primary() {
      skip_ws();
      if (pos >= s.size()) fail("unexpected end of formula");
      if (eat('(')) {
        const int e = parse_expr();
        if (!eat(')')) fail("expected ')'");
        return e;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const std::string tail(s.substr(pos));
        char* end = nullptr;
        const double v = std::strtod(tail.c_str(), &end);
        if (end == tail.c_str()) fail("bad number");
        pos += static_cast<std::size_t>(end - tail.c_str());
        return push(Node{Op::Const, v, -1, Fn::Sin, {}});
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        const std::string name(s.substr(start, pos - start));
        if (eat('(')) return parse_call(name);
        for (std::size_t i = 0; i < vars.size(); ++i)
          if (vars[i] == name) return push(Node{Op::Var, 0.0, static_cast<int>(i), Fn::Sin, {}});
        if (name == "pi") return push(Node{Op::Const, std::numbers::pi, -1, Fn::Sin, {}});
        pos = start;
        fail("unknown variable '" + name + "'");
      }
      fail(std::string("unexpected character '") + c + "'");
    }
    int parse_call(const std::string& name) {
      struct Entry {
        const char* name;
        Fn fn;
        int arity;
      };
      static constexpr Entry table[] = {
          {"sin", Fn::Sin, 1},   {"cos", Fn::Cos, 1},     {"tan", Fn::Tan, 1}, {"exp", Fn::Exp, 1},
          {"log", Fn::Log, 1},   {"sqrt", Fn::Sqrt, 1},   {"abs", Fn::Abs, 1}, {"atan2", Fn::Atan2, 2},
          {"pow", Fn::Pow, 2},   {"min", Fn::Min, 2},     {"max", Fn::Max, 2},
      };
      const Entry* hit = nullptr;
      for (const Entry& e : table)
        if (name == e.name) hit = &e;
      if (!hit) fail("unknown function '" + name + "'");
      std::vector<int> args{parse_expr()};
      while (eat(',')) args.push_back(parse_expr());
      if (!eat(')')) fail("expected ')' after arguments");
      if (static_cast<int>(args.size()) != hit->arity) fail("wrong argument count for '" + name + "'");
      return push(Node{Op::Call, 0.0, -1, hit->fn, std::move(args)});
    }
  };

  double eval(int i, std::span<const double> vars) const {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    auto arg = [&](std::size_t k) { return eval(n.kids[k], vars); };
    switch (n.op) {
      case Op::Const: return n.value;
      case Op::Var: return vars[static_cast<std::size_t>(n.var)];
      case Op::Add: return arg(0) + arg(1);
      case Op::Sub: return arg(0) - arg(1);
      case Op::Mul: return arg(0) * arg(1);
      case Op::Div: return arg(0) / arg(1);
      case Op::Pow: return std::pow(arg(0), arg(1));
      case Op::Neg: return -arg(0);
      case Op::Call: break;
    }
    switch (n.fn) {
      case Fn::Sin: return std::sin(arg(0));
      case Fn::Cos: return std::cos(arg(0));
      case Fn::Tan: return std::tan(arg(0));
      case Fn::Exp: return std::exp(arg(0));
      case Fn::Log: return std::log(arg(0));
      case Fn::Sqrt: return std::sqrt(arg(0));
      case Fn::Abs: return std::abs(arg(0));
      case Fn::Atan2: return std::atan2(arg(0), arg(1));
      case Fn::Pow: return std::pow(arg(0), arg(1));
      case Fn::Min: return std::min(arg(0), arg(1));
      case Fn::Max: return std::max(arg(0), arg(1));
    }
    return 0.0;
  }

  std::vector<Node> nodes_;
  int root_ = 0;
  std::string text_;
};

/// Variable names bound for a chart of the given dimension, in evaluation
/// order: axis aliases, generic x0..x2, then the Euclidean radius r.
inline std::vector<std::string> coordinate_names(int dim) {
  if (dim == 2) return {"y", "z", "x0", "x1", "r"};
  return {"x", "y", "z", "x0", "x1", "x2", "r"};
}

/// Values matching coordinate_names() for a point with the given coordinates.
inline std::vector<double> coordinate_values(std::span<const double> p) {
  std::vector<double> v(p.begin(), p.end());
  double r2 = 0.0;
  for (double c : p) {
    v.push_back(c);
    r2 += c * c;
  }
  v.push_back(std::sqrt(r2));
  return v;
}

}  // namespace conefield
