#include "aniso/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <vector>

#include "aniso/strutil.hpp"

namespace aniso {

struct Expr::Node {
  enum class Op { Const, Coord, Add, Sub, Mul, Div, Pow, Neg, Abs, Sin, Cos, Exp, Min, Max };
  Op op = Op::Const;
  double value = 0.0;
  int coord = 0;
  std::shared_ptr<const Node> a, b;

  double eval(const VecN& x) const {
    switch (op) {
      case Op::Const: return value;
      case Op::Coord: return x[coord];
      case Op::Add: return a->eval(x) + b->eval(x);
      case Op::Sub: return a->eval(x) - b->eval(x);
      case Op::Mul: return a->eval(x) * b->eval(x);
      case Op::Div: return a->eval(x) / b->eval(x);
      case Op::Pow: return std::pow(a->eval(x), b->eval(x));
      case Op::Neg: return -a->eval(x);
      case Op::Abs: return std::abs(a->eval(x));
      case Op::Sin: return std::sin(a->eval(x));
      case Op::Cos: return std::cos(a->eval(x));
      case Op::Exp: return std::exp(a->eval(x));
      case Op::Min: return std::min(a->eval(x), b->eval(x));
      case Op::Max: return std::max(a->eval(x), b->eval(x));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Node = Expr::Node;

NodePtr make(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(const std::string& s, int dim) : s_(s), dim_(dim) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return e;
  }

 private:
  const std::string& s_;
  int dim_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& why) {
    throw std::invalid_argument("expression '" + s_ + "': " + why + " at offset " +
                                std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr e = term();
    while (true) {
      if (eat('+')) e = make(Node::Op::Add, e, term());
      else if (eat('-')) e = make(Node::Op::Sub, e, term());
      else return e;
    }
  }

  NodePtr term() {
    NodePtr e = unary();
    while (true) {
      if (eat('*')) e = make(Node::Op::Mul, e, unary());
      else if (eat('/')) e = make(Node::Op::Div, e, unary());
      else return e;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Node::Op::Neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return make(Node::Op::Pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return word();
    fail("unexpected character");
  }

  NodePtr number() {
    size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      size_t mark = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' belonged to something else
      }
    }
    auto n = std::make_shared<Node>();
    n->op = Node::Op::Const;
    try {
      n->value = std::stod(s_.substr(start, pos_ - start));
    } catch (const std::exception&) {
      fail("bad number");
    }
    return n;
  }

  NodePtr word() {
    size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                s_[pos_] == '_')) ++pos_;
    const std::string w = s_.substr(start, pos_ - start);
    if (w.size() == 2 && w[0] == 'x' && w[1] >= '1' && w[1] <= '9') {
      const int k = w[1] - '1';
      if (k >= dim_) fail("coordinate " + w + " exceeds the dimension");
      auto n = std::make_shared<Node>();
      n->op = Node::Op::Coord;
      n->coord = k;
      return n;
    }
    if (w == "pi") {
      auto n = std::make_shared<Node>();
      n->op = Node::Op::Const;
      n->value = M_PI;
      return n;
    }
    Node::Op op;
    int arity = 1;
    if (w == "abs") op = Node::Op::Abs;
    else if (w == "sin") op = Node::Op::Sin;
    else if (w == "cos") op = Node::Op::Cos;
    else if (w == "exp") op = Node::Op::Exp;
    else if (w == "min") { op = Node::Op::Min; arity = 2; }
    else if (w == "max") { op = Node::Op::Max; arity = 2; }
    else fail("unknown name '" + w + "'");
    if (!eat('(')) fail("expected '(' after " + w);
    NodePtr a = expr();
    NodePtr b;
    if (arity == 2) {
      if (!eat(',')) fail("expected ',' in " + w);
      b = expr();
    }
    if (!eat(')')) fail("missing ')' after " + w);
    return make(op, a, b);
  }
};

}  // namespace

Expr Expr::parse(const std::string& text, int dim) {
  Expr e;
  e.source_ = trim(text);
  if (e.source_.empty()) throw std::invalid_argument("expression: empty");
  Parser p(e.source_, dim);
  e.root_ = p.run();
  return e;
}

double Expr::operator()(const VecN& x) const { return root_->eval(x); }

}  // namespace aniso
