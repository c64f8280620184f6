// Small arithmetic grammar for profile functions, evaluated on jets.
//
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := ('-'|'+') unary | power
//   power := primary ('^' unary)?
//   primary := number | name | func '(' expr ')' | '(' expr ')'
//
// Functions: exp log sqrt sin cos. The constant pi is predefined.
#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pklab/jet.hpp"

namespace pklab {

class Expression {
 public:
  Expression() = default;

  // names lists the identifiers the expression may use; their order fixes the
  // layout of the value span passed to eval(). Throws ConfigError.
  static Expression parse(std::string_view text, const std::vector<std::string>& names);

  Jet eval(std::span<const Jet> values) const;
  double eval(std::span<const double> values) const;

  const std::string& text() const { return text_; }
  const std::vector<std::string>& names() const { return names_; }
  // names actually referenced
  std::set<std::string> free_variables() const;
  bool is_constant() const;
  bool empty() const { return nodes_.empty(); }

 private:
  struct Node {
    enum Kind { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Func } kind;
    double num = 0.0;
    int var = -1;
    Elementary fn = Elementary::Exp;
    int lhs = -1, rhs = -1;
  };
  friend class ExpressionParser;

  template <class V>
  V eval_node(int i, std::span<const V> values) const;
  bool constant_subtree(int i) const;

  std::string text_;
  std::vector<std::string> names_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace pklab
