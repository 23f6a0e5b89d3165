#include "charentropy/support/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <vector>

namespace charentropy {

struct Expr::Node {
  enum class Kind { kConst, kVar, kUnary, kBinary, kCall } kind;
  double value = 0;
  int var = 0;  // 0:x 1:t 2:y
  char op = 0;
  std::string fn;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  explicit Parser(const std::string& text) : s(text) {}

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  char peek() {
    skip();
    return pos < s.size() ? s[pos] : '\0';
  }

  NodePtr make_const(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Node::Kind::kConst;
    n->value = v;
    return n;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos;
      NodePtr rhs = parse_term();
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Node::Kind::kBinary;
      n->op = c;
      n->a = lhs;
      n->b = rhs;
      lhs = n;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos;
      NodePtr rhs = parse_unary();
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Node::Kind::kBinary;
      n->op = c;
      n->a = lhs;
      n->b = rhs;
      lhs = n;
    }
  }

  // exponentiation binds tighter than unary minus: -x^2 = -(x^2)
  NodePtr parse_unary() {
    const char c = peek();
    if (c == '-' || c == '+') {
      ++pos;
      NodePtr inner = parse_unary();
      if (c == '+') return inner;
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Node::Kind::kUnary;
      n->op = '-';
      n->a = inner;
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (peek() == '^') {
      ++pos;
      NodePtr exp = parse_unary();  // right associative, allows x^-2
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Node::Kind::kBinary;
      n->op = '^';
      n->a = base;
      n->b = exp;
      return n;
    }
    return base;
  }

  NodePtr parse_primary() {
    skip();
    if (pos >= s.size()) throw InputError("expression ended unexpectedly");
    const char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const double v = std::stod(s.substr(pos), &used);
      pos += used;
      return make_const(v);
    }
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!eat(')')) throw InputError("missing ')' in expression");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t b = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
        ++pos;
      const std::string name = s.substr(b, pos - b);
      if (name == "x" || name == "t" || name == "y") {
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Node::Kind::kVar;
        n->var = name == "x" ? 0 : (name == "t" ? 1 : 2);
        return n;
      }
      if (name == "pi") return make_const(3.14159265358979323846);
      if (name == "e") return make_const(2.71828182845904523536);
      if (eat('(')) {
        static const char* known[] = {"sin",  "cos",  "tan",  "exp",  "log", "sqrt",
                                      "abs",  "sinh", "cosh", "tanh", "atan"};
        bool ok = false;
        for (const char* fn : known) ok = ok || name == fn;
        if (!ok) throw InputError("unknown function '" + name + "' in expression");
        NodePtr arg = parse_expr();
        if (!eat(')')) throw InputError("missing ')' after " + name);
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Node::Kind::kCall;
        n->fn = name;
        n->a = arg;
        return n;
      }
      throw InputError("unknown identifier '" + name + "' in expression");
    }
    throw InputError(std::string("unexpected character '") + c + "' in expression");
  }
};

double eval_node(const Expr::Node& n, double x, double t, double y) {
  using Kind = Expr::Node::Kind;
  switch (n.kind) {
    case Kind::kConst:
      return n.value;
    case Kind::kVar:
      return n.var == 0 ? x : (n.var == 1 ? t : y);
    case Kind::kUnary:
      return -eval_node(*n.a, x, t, y);
    case Kind::kBinary: {
      const double a = eval_node(*n.a, x, t, y);
      const double b = eval_node(*n.b, x, t, y);
      switch (n.op) {
        case '+':
          return a + b;
        case '-':
          return a - b;
        case '*':
          return a * b;
        case '/':
          return a / b;
        case '^':
          return std::pow(a, b);
      }
      return 0;
    }
    case Kind::kCall: {
      const double a = eval_node(*n.a, x, t, y);
      if (n.fn == "sin") return std::sin(a);
      if (n.fn == "cos") return std::cos(a);
      if (n.fn == "tan") return std::tan(a);
      if (n.fn == "exp") return std::exp(a);
      if (n.fn == "log") return std::log(a);
      if (n.fn == "sqrt") return std::sqrt(a);
      if (n.fn == "abs") return std::fabs(a);
      if (n.fn == "sinh") return std::sinh(a);
      if (n.fn == "cosh") return std::cosh(a);
      if (n.fn == "tanh") return std::tanh(a);
      if (n.fn == "atan") return std::atan(a);
      throw InputError("unknown function '" + n.fn + "' in expression");
    }
  }
  return 0;
}

}  // namespace

Expr Expr::parse(const std::string& text) {
  Parser p(text);
  Expr e;
  e.root_ = p.parse_expr();
  p.skip();
  if (p.pos != text.size()) throw InputError("trailing input in expression: " + text.substr(p.pos));
  return e;
}

double Expr::eval(double x, double t, double y) const { return eval_node(*root_, x, t, y); }

ScalarField Expr::field() const {
  ScalarField f;
  const Expr self = *this;
  f.value = [self](const double* p) { return self.eval(p[0], p[1], p[2]); };
  return f;
}

}  // namespace charentropy
