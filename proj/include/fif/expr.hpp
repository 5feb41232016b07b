#pragma once

// Closed-form real functions of one variable `x`.
//
// Grammar (whitespace insignificant):
//
//   expr     := term { ('+' | '-') term }
//   term     := unary { ('*' | '/') unary }
//   unary    := '-' unary | power
//   power    := primary [ '^' exponent ]
//   exponent := '-' primary | primary          (must not depend on x)
//   primary  := number | 'x' | func '(' expr ')' | '(' expr ')'
//   func     := 'abs' | 'sin' | 'cos' | 'exp' | 'log' | 'sqrt'
//   number   := digits [ '.' digits ] [ ('e' | 'E') [ '+' | '-' ] digits ]
//
// Constant nodes always hold nonnegative values; a negative constant is
// represented as a negation. That keeps print -> parse structurally exact.

#include <memory>
#include <string>
#include <string_view>

#include "fif/error.hpp"

namespace fif {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

namespace expr {

enum class Op {
  constant,
  variable,
  negate,
  abs,
  sin,
  cos,
  exp,
  log,
  sqrt,
  add,
  sub,
  mul,
  div,
  pow,  // lhs ^ value, exponent held in `value`
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  double value = 0.0;
  NodePtr lhs;
  NodePtr rhs;
};

/// Immutable expression tree. Copies share nodes; safe to read from many threads.
class Expr {
 public:
  Expr();  // the constant 0

  static Expr constant(double v);
  static Expr variable();
  static Expr unary(Op op, Expr arg);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr power(Expr base, double exponent);

  const Node& node() const { return *root_; }
  Op op() const { return root_->op; }
  double value() const { return root_->value; }
  Expr lhs() const { return Expr(root_->lhs); }
  Expr rhs() const { return Expr(root_->rhs); }

  bool is_constant(double v) const { return op() == Op::constant && value() == v; }
  /// True when the tree contains no `x`.
  bool is_closed() const;
  bool contains(Op op) const;

  double operator()(double x) const;
  std::string str() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(NodePtr root) : root_(std::move(root)) {}
  NodePtr root_;
};

Expr parse(std::string_view text);

/// Exact recursive evaluation. Throws DomainError naming the offending node.
double evaluate(const Expr& e, double x);

/// Symbolic derivative with light constant folding (0 and 1 identities only).
/// d|u| is emitted as u/|u| * u', so evaluating it at a kink raises DomainError.
Expr differentiate(const Expr& e);

std::string to_string(const Expr& e);

/// max |e| over n+1 equispaced points of `iv`; a lower estimate of the true sup.
double sup_norm(const Expr& e, Interval iv, std::size_t n);

/// max |e'| used as a Lipschitz-constant estimate. When `e` contains `abs`
/// the grid is shifted to the n cell midpoints so kinks at grid nodes are skipped.
double derivative_sup(const Expr& e, Interval iv, std::size_t n);

}  // namespace expr

using expr::Expr;

}  // namespace fif
