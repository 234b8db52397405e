#pragma once

// Small expression DSL for problem data (phi, G, f, initial bodies).
//
// Grammar (normative):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?
//   unary  := '-' unary | atom
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
// Identifiers: the declared variables, the function names
// {exp, log, sin, cos, abs, sqrt}, and the constant pi.
//
// Note the grammar binds unary minus tighter than '^': "-2^2" is (-2)^2 = 4.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "orlicz_flow/dual.hpp"
#include "orlicz_flow/errors.hpp"

namespace orlicz_flow {

namespace detail { class ExpressionParser; }

class ExpressionAst {
public:
  enum class Func : std::uint8_t { exp, log, sin, cos, abs, sqrt };

  struct Node {
    enum class Kind : std::uint8_t {
      number, variable, add, sub, mul, div, pow, neg, call
    };
    Kind kind;
    double value = 0.0;       // Kind::number
    int var = -1;             // Kind::variable: index into variables()
    Func func = Func::exp;    // Kind::call
    int a = -1;               // first child
    int b = -1;               // second child (binary ops only)
  };

  const std::vector<std::string>& variables() const { return vars_; }

  // Evaluate with values bound positionally to variables().  Scalar is
  // double or Dual (or anything with the same function set).
  template <class Scalar>
  Scalar eval(const std::vector<Scalar>& values) const {
    return eval_node(root_, values);
  }

  double eval1(double x) const { return eval(std::vector<double>{x}); }

  // Fully parenthesized text that re-parses to an equivalent expression.
  std::string print() const { return print_node(root_); }

  friend ExpressionAst parse_expression(const std::string& text,
                                        const std::vector<std::string>& vars);
  friend class detail::ExpressionParser;

private:
  std::vector<Node> nodes_;
  std::vector<std::string> vars_;
  int root_ = -1;

  template <class Scalar>
  Scalar eval_node(int idx, const std::vector<Scalar>& values) const {
    using std::exp; using std::log; using std::sin; using std::cos;
    using std::abs; using std::sqrt; using std::pow;
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.kind) {
      case Node::Kind::number:   return Scalar(n.value);
      case Node::Kind::variable: return values[static_cast<std::size_t>(n.var)];
      case Node::Kind::add: return eval_node(n.a, values) + eval_node(n.b, values);
      case Node::Kind::sub: return eval_node(n.a, values) - eval_node(n.b, values);
      case Node::Kind::mul: return eval_node(n.a, values) * eval_node(n.b, values);
      case Node::Kind::div: return eval_node(n.a, values) / eval_node(n.b, values);
      case Node::Kind::pow: return pow(eval_node(n.a, values), eval_node(n.b, values));
      case Node::Kind::neg: return -eval_node(n.a, values);
      case Node::Kind::call: {
        Scalar x = eval_node(n.a, values);
        switch (n.func) {
          case Func::exp:  return exp(x);
          case Func::log:  return log(x);
          case Func::sin:  return sin(x);
          case Func::cos:  return cos(x);
          case Func::abs:  return abs(x);
          case Func::sqrt: return sqrt(x);
        }
        return Scalar(0.0);  // unreachable
      }
    }
    return Scalar(0.0);  // unreachable
  }

  static const char* func_name(Func f) {
    switch (f) {
      case Func::exp: return "exp";
      case Func::log: return "log";
      case Func::sin: return "sin";
      case Func::cos: return "cos";
      case Func::abs: return "abs";
      case Func::sqrt: return "sqrt";
    }
    return "?";
  }

  std::string print_node(int idx) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    char buf[40];
    switch (n.kind) {
      case Node::Kind::number:
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        return buf;
      case Node::Kind::variable: return vars_[static_cast<std::size_t>(n.var)];
      case Node::Kind::add: return "(" + print_node(n.a) + " + " + print_node(n.b) + ")";
      case Node::Kind::sub: return "(" + print_node(n.a) + " - " + print_node(n.b) + ")";
      case Node::Kind::mul: return "(" + print_node(n.a) + " * " + print_node(n.b) + ")";
      case Node::Kind::div: return "(" + print_node(n.a) + " / " + print_node(n.b) + ")";
      case Node::Kind::pow: return "(" + print_node(n.a) + " ^ " + print_node(n.b) + ")";
      case Node::Kind::neg: return "(-" + print_node(n.a) + ")";
      case Node::Kind::call:
        return std::string(func_name(n.func)) + "(" + print_node(n.a) + ")";
    }
    return "?";
  }
};

namespace detail {

class ExpressionParser {
public:
  ExpressionParser(const std::string& text, const std::vector<std::string>& vars,
                   ExpressionAst& out)
      : text_(text), vars_(vars), out_(out) {}

  void run() {
    if (text_.empty()) throw ParseError("empty expression", 0);
    int root = parse_expr();
    skip_ws();
    if (pos_ < text_.size())
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    out_.root_ = root;
    out_.vars_ = vars_;
  }

private:
  const std::string& text_;
  const std::vector<std::string>& vars_;
  ExpressionAst& out_;
  std::size_t pos_ = 0;

  using Node = ExpressionAst::Node;
  using Func = ExpressionAst::Func;

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) { ++pos_; return true; }
    return false;
  }

  int add_node(Node n) {
    out_.nodes_.push_back(n);
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int make_binary(Node::Kind kind, int a, int b) {
    Node n; n.kind = kind; n.a = a; n.b = b;
    return add_node(n);
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (consume('+'))      lhs = make_binary(Node::Kind::add, lhs, parse_term());
      else if (consume('-')) lhs = make_binary(Node::Kind::sub, lhs, parse_term());
      else return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_factor();
    for (;;) {
      if (consume('*'))      lhs = make_binary(Node::Kind::mul, lhs, parse_factor());
      else if (consume('/')) lhs = make_binary(Node::Kind::div, lhs, parse_factor());
      else return lhs;
    }
  }

  int parse_factor() {
    int base = parse_unary();
    if (consume('^'))  // right-associative
      return make_binary(Node::Kind::pow, base, parse_factor());
    return base;
  }

  int parse_unary() {
    if (consume('-')) {
      Node n; n.kind = Node::Kind::neg; n.a = parse_unary();
      return add_node(n);
    }
    return parse_atom();
  }

  int parse_atom() {
    const char c = peek();
    const std::size_t start = pos_;
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      if (!consume(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      return parse_number(start);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return parse_ident(start);
    }
    if (c == '\0') throw ParseError("unexpected end of expression", pos_);
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  int parse_number(std::size_t start) {
    const char* begin = text_.c_str() + start;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", start);
    pos_ = start + static_cast<std::size_t>(end - begin);
    Node n; n.kind = Node::Kind::number; n.value = v;
    return add_node(n);
  }

  int parse_ident(std::size_t start) {
    std::size_t end = start;
    while (end < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[end])) ||
            text_[end] == '_'))
      ++end;
    const std::string name = text_.substr(start, end - start);
    pos_ = end;

    static const std::pair<const char*, Func> kFuncs[] = {
        {"exp", Func::exp}, {"log", Func::log}, {"sin", Func::sin},
        {"cos", Func::cos}, {"abs", Func::abs}, {"sqrt", Func::sqrt}};

    if (peek() == '(') {
      for (const auto& [fname, f] : kFuncs) {
        if (name == fname) {
          ++pos_;  // '('
          Node n; n.kind = Node::Kind::call; n.func = f; n.a = parse_expr();
          if (!consume(')')) throw ParseError("expected ')'", pos_);
          return add_node(n);
        }
      }
      throw ParseError("unknown function '" + name + "'", start);
    }

    if (name == "pi") {
      Node n; n.kind = Node::Kind::number; n.value = M_PI;
      return add_node(n);
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        Node n; n.kind = Node::Kind::variable; n.var = static_cast<int>(i);
        return add_node(n);
      }
    }
    for (const auto& [fname, f] : kFuncs) {
      if (name == fname)
        throw ParseError("function '" + name + "' needs an argument list", start);
    }
    throw ParseError("unknown variable '" + name + "'", start);
  }
};

}  // namespace detail

inline ExpressionAst parse_expression(const std::string& text,
                                      const std::vector<std::string>& vars) {
  ExpressionAst ast;
  detail::ExpressionParser(text, vars, ast).run();
  return ast;
}

}  // namespace orlicz_flow
