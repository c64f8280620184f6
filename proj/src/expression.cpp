#include "pklab/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pklab/errors.hpp"

namespace pklab {

class ExpressionParser {
 public:
  ExpressionParser(Expression& e, std::string_view s) : e_(e), s_(s) {}

  int parse_all() {
    int r = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return r;
  }

 private:
  using Node = Expression::Node;

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "expression \"" << s_ << "\": " << msg << " at position " << pos_;
    throw ConfigError(os.str());
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int push(Node n) {
    e_.nodes_.push_back(n);
    return static_cast<int>(e_.nodes_.size()) - 1;
  }
  int binary(Node::Kind k, int a, int b) {
    Node n{k};
    n.lhs = a;
    n.rhs = b;
    return push(n);
  }

  int expr() {
    int a = term();
    for (;;) {
      if (accept('+'))
        a = binary(Node::Add, a, term());
      else if (accept('-'))
        a = binary(Node::Sub, a, term());
      else
        return a;
    }
  }

  int term() {
    int a = unary();
    for (;;) {
      if (accept('*'))
        a = binary(Node::Mul, a, unary());
      else if (accept('/'))
        a = binary(Node::Div, a, unary());
      else
        return a;
    }
  }

  int unary() {
    if (accept('-')) {
      Node n{Node::Neg};
      n.lhs = unary();
      return push(n);
    }
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    int base = primary();
    if (accept('^')) return binary(Node::Pow, base, unary());
    return base;
  }

  int primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (accept('(')) {
      int r = expr();
      if (!accept(')')) fail("expected ')'");
      return r;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(std::string(s_.substr(pos_)), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      Node n{Node::Num};
      n.num = v;
      return push(n);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string name(s_.substr(start, pos_ - start));
      skip();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        Elementary fn;
        if (name == "exp") fn = Elementary::Exp;
        else if (name == "log") fn = Elementary::Log;
        else if (name == "sqrt") fn = Elementary::Sqrt;
        else if (name == "sin") fn = Elementary::Sin;
        else if (name == "cos") fn = Elementary::Cos;
        else fail("unknown function '" + name + "'");
        accept('(');
        int arg = expr();
        if (!accept(')')) fail("expected ')' after function argument");
        Node n{Node::Func};
        n.fn = fn;
        n.lhs = arg;
        return push(n);
      }
      for (std::size_t k = 0; k < e_.names_.size(); ++k) {
        if (e_.names_[k] == name) {
          Node n{Node::Var};
          n.var = static_cast<int>(k);
          return push(n);
        }
      }
      if (name == "pi") {
        Node n{Node::Num};
        n.num = std::numbers::pi;
        return push(n);
      }
      std::string allowed;
      for (const auto& a : e_.names_) allowed += (allowed.empty() ? "" : ", ") + a;
      fail("unknown identifier '" + name + "' (allowed: " + allowed + ")");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expression& e_;
  std::string_view s_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text, const std::vector<std::string>& names) {
  Expression e;
  e.text_ = std::string(text);
  e.names_ = names;
  ExpressionParser p(e, e.text_);
  e.root_ = p.parse_all();
  return e;
}

bool Expression::constant_subtree(int i) const {
  const Node& n = nodes_[i];
  switch (n.kind) {
    case Node::Num: return true;
    case Node::Var: return false;
    case Node::Neg:
    case Node::Func: return constant_subtree(n.lhs);
    default: return constant_subtree(n.lhs) && constant_subtree(n.rhs);
  }
}

bool Expression::is_constant() const { return root_ >= 0 && constant_subtree(root_); }

std::set<std::string> Expression::free_variables() const {
  std::set<std::string> out;
  for (const auto& n : nodes_)
    if (n.kind == Node::Var) out.insert(names_[n.var]);
  return out;
}

namespace {

double apply_double(Elementary f, double x) {
  switch (f) {
    case Elementary::Exp: return std::exp(x);
    case Elementary::Log:
      if (!(x > 0)) throw DomainError("log: argument " + std::to_string(x) + " outside domain (> 0)");
      return std::log(x);
    case Elementary::Sqrt:
      if (!(x > 0)) throw DomainError("sqrt: argument " + std::to_string(x) + " outside domain (> 0)");
      return std::sqrt(x);
    case Elementary::Sin: return std::sin(x);
    case Elementary::Cos: return std::cos(x);
    case Elementary::Reciprocal: return 1.0 / x;
    case Elementary::Pow: break;
  }
  return x;
}

double pow_double(double a, double b) {
  if (b == std::floor(b) && std::abs(b) <= 64) {
    if (b < 0 && a == 0.0) throw DomainError("pow: zero base with negative exponent");
    return std::pow(a, b);
  }
  if (!(a > 0)) throw DomainError("pow: base " + std::to_string(a) + " outside domain (> 0)");
  return std::pow(a, b);
}

}  // namespace

template <class V>
V Expression::eval_node(int i, std::span<const V> v) const {
  const Node& n = nodes_[i];
  if constexpr (std::is_same_v<V, double>) {
    switch (n.kind) {
      case Node::Num: return n.num;
      case Node::Var: return v[n.var];
      case Node::Add: return eval_node(n.lhs, v) + eval_node(n.rhs, v);
      case Node::Sub: return eval_node(n.lhs, v) - eval_node(n.rhs, v);
      case Node::Mul: return eval_node(n.lhs, v) * eval_node(n.rhs, v);
      case Node::Div: {
        double d = eval_node(n.rhs, v);
        if (d == 0.0) throw DomainError("division by zero");
        return eval_node(n.lhs, v) / d;
      }
      case Node::Pow: return pow_double(eval_node(n.lhs, v), eval_node(n.rhs, v));
      case Node::Neg: return -eval_node(n.lhs, v);
      case Node::Func: return apply_double(n.fn, eval_node(n.lhs, v));
    }
    return 0.0;
  } else {
    const Jet& proto = v[0];
    switch (n.kind) {
      case Node::Num: return Jet::constant(n.num, proto.dim(), proto.order());
      case Node::Var: return v[n.var];
      case Node::Add: return eval_node(n.lhs, v) + eval_node(n.rhs, v);
      case Node::Sub: return eval_node(n.lhs, v) - eval_node(n.rhs, v);
      case Node::Mul: {
        // constant factors stay scalar multiplies
        if (nodes_[n.lhs].kind == Node::Num) return eval_node(n.rhs, v) * nodes_[n.lhs].num;
        if (nodes_[n.rhs].kind == Node::Num) return eval_node(n.lhs, v) * nodes_[n.rhs].num;
        return eval_node(n.lhs, v) * eval_node(n.rhs, v);
      }
      case Node::Div: {
        if (nodes_[n.rhs].kind == Node::Num) {
          if (nodes_[n.rhs].num == 0.0) throw DomainError("division by zero");
          return eval_node(n.lhs, v) / nodes_[n.rhs].num;
        }
        return eval_node(n.lhs, v) / eval_node(n.rhs, v);
      }
      case Node::Pow: {
        if (constant_subtree(n.rhs)) {
          std::vector<double> none;
          double e = eval_node<double>(n.rhs, std::span<const double>(none));
          return pow(eval_node(n.lhs, v), e);
        }
        return exp(eval_node(n.rhs, v) * log(eval_node(n.lhs, v)));
      }
      case Node::Neg: return -eval_node(n.lhs, v);
      case Node::Func: return apply(n.fn, eval_node(n.lhs, v));
    }
    return proto;
  }
}

Jet Expression::eval(std::span<const Jet> values) const {
  if (values.empty()) throw std::invalid_argument("expression: jet evaluation needs at least one value");
  return eval_node<Jet>(root_, values);
}

double Expression::eval(std::span<const double> values) const { return eval_node<double>(root_, values); }

}  // namespace pklab
