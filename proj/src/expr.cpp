#include "fif/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace fif::expr {

namespace {

NodePtr make_node(Op op, double value = 0.0, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  return std::make_shared<const Node>(Node{op, value, std::move(lhs), std::move(rhs)});
}

const char* function_name(Op op) {
  switch (op) {
    case Op::abs: return "abs";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sqrt: return "sqrt";
    default: return "?";
  }
}

bool nodes_equal(const Node* a, const Node* b) {
  if (a == b) return true;
  if (a == nullptr || b == nullptr) return false;
  if (a->op != b->op || a->value != b->value) return false;
  return nodes_equal(a->lhs.get(), b->lhs.get()) && nodes_equal(a->rhs.get(), b->rhs.get());
}

bool node_contains(const Node* n, Op op) {
  if (n == nullptr) return false;
  if (n->op == op) return true;
  return node_contains(n->lhs.get(), op) || node_contains(n->rhs.get(), op);
}

// ---------------------------------------------------------------------------
// Printing

int precedence(Op op) {
  switch (op) {
    case Op::add:
    case Op::sub:
      return 1;
    case Op::mul:
    case Op::div:
      return 2;
    case Op::negate:
      return 3;
    case Op::pow:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print(const Node& n, std::string& out) {
  auto child = [&out](const Node& c, bool paren) {
    if (paren) out += '(';
    print(c, out);
    if (paren) out += ')';
  };
  switch (n.op) {
    case Op::constant:
      out += format_number(n.value);
      return;
    case Op::variable:
      out += 'x';
      return;
    case Op::negate:
      out += '-';
      child(*n.lhs, precedence(n.lhs->op) < precedence(Op::negate));
      return;
    case Op::pow:
      child(*n.lhs, precedence(n.lhs->op) <= precedence(Op::pow));
      out += '^';
      if (n.value < 0) {
        out += "(-" + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
      const int p = precedence(n.op);
      child(*n.lhs, precedence(n.lhs->op) < p);
      out += n.op == Op::add ? '+' : n.op == Op::sub ? '-' : n.op == Op::mul ? '*' : '/';
      child(*n.rhs, precedence(n.rhs->op) <= p);
      return;
    }
    default:
      out += function_name(n.op);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
  }
}

// ---------------------------------------------------------------------------
// Parsing

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr run() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < text_.size()) throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
    if (text_[pos_] != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(Op::add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = Expr::binary(Op::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Op::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary(Op::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::unary(Op::negate, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    skip_ws();
    const std::size_t at = pos_;
    if (!accept('^')) return base;
    Expr exponent = accept('-') ? Expr::unary(Op::negate, parse_primary()) : parse_primary();
    if (!exponent.is_closed()) throw ParseError("exponent must be constant", at);
    return Expr::power(base, evaluate(exponent, 0.0));
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [this] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t count = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent", pos_);
    }
    const std::string literal(text_.substr(start, pos_ - start));
    const double v = std::strtod(literal.c_str(), nullptr);
    if (!std::isfinite(v)) throw ParseError("number out of range", start);
    return Expr::constant(v);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x") return Expr::variable();

    static constexpr Op functions[] = {Op::abs, Op::sin, Op::cos, Op::exp, Op::log, Op::sqrt};
    const auto it = std::find_if(std::begin(functions), std::end(functions),
                                 [&](Op op) { return name == function_name(op); });
    if (it == std::end(functions)) throw ParseError("unknown identifier '" + std::string(name) + "'", start);

    expect('(');
    Expr arg = parse_expr();
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ',')
      throw ParseError("arity mismatch: '" + std::string(name) + "' takes one argument", pos_);
    expect(')');
    return Expr::unary(*it, arg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Evaluation

[[noreturn]] void domain_fail(const char* what, const Node& n) {
  std::string s;
  print(n, s);
  throw DomainError(what, s);
}

double eval(const Node& n, double x) {
  double r = 0.0;
  switch (n.op) {
    case Op::constant:
      return n.value;
    case Op::variable:
      return x;
    case Op::negate:
      return -eval(*n.lhs, x);
    case Op::abs:
      return std::fabs(eval(*n.lhs, x));
    case Op::sin:
      return std::sin(eval(*n.lhs, x));
    case Op::cos:
      return std::cos(eval(*n.lhs, x));
    case Op::exp:
      r = std::exp(eval(*n.lhs, x));
      break;
    case Op::log: {
      const double u = eval(*n.lhs, x);
      if (!(u > 0.0)) domain_fail("log of nonpositive value", n);
      return std::log(u);
    }
    case Op::sqrt: {
      const double u = eval(*n.lhs, x);
      if (u < 0.0) domain_fail("sqrt of negative value", n);
      return std::sqrt(u);
    }
    case Op::add:
      r = eval(*n.lhs, x) + eval(*n.rhs, x);
      break;
    case Op::sub:
      r = eval(*n.lhs, x) - eval(*n.rhs, x);
      break;
    case Op::mul:
      r = eval(*n.lhs, x) * eval(*n.rhs, x);
      break;
    case Op::div: {
      const double num = eval(*n.lhs, x);
      const double den = eval(*n.rhs, x);
      if (den == 0.0) domain_fail("division by zero", n);
      r = num / den;
      break;
    }
    case Op::pow: {
      const double u = eval(*n.lhs, x);
      const double c = n.value;
      if (u < 0.0 && c != std::floor(c)) domain_fail("non-integer power of negative value", n);
      if (u == 0.0 && c < 0.0) domain_fail("negative power of zero", n);
      r = std::pow(u, c);
      break;
    }
  }
  if (!std::isfinite(r)) domain_fail("non-finite result", n);
  return r;
}

// ---------------------------------------------------------------------------
// Differentiation helpers with 0/1 folding

Expr add(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::binary(Op::add, a, b);
}

Expr sub(const Expr& a, const Expr& b) {
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return Expr::unary(Op::negate, b);
  return Expr::binary(Op::sub, a, b);
}

Expr mul(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  return Expr::binary(Op::mul, a, b);
}

Expr div(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return Expr::constant(0.0);
  if (b.is_constant(1.0)) return a;
  return Expr::binary(Op::div, a, b);
}

Expr neg(const Expr& a) {
  if (a.is_constant(0.0)) return a;
  return Expr::unary(Op::negate, a);
}

Expr derive(const Expr& e) {
  switch (e.op()) {
    case Op::constant:
      return Expr::constant(0.0);
    case Op::variable:
      return Expr::constant(1.0);
    default:
      break;
  }
  const Expr u = e.lhs();
  const Expr du = derive(u);
  switch (e.op()) {
    case Op::negate:
      return neg(du);
    case Op::abs:
      return mul(div(u, e), du);
    case Op::sin:
      return mul(Expr::unary(Op::cos, u), du);
    case Op::cos:
      return neg(mul(Expr::unary(Op::sin, u), du));
    case Op::exp:
      return mul(e, du);
    case Op::log:
      return div(du, u);
    case Op::sqrt:
      return div(du, mul(Expr::constant(2.0), e));
    case Op::pow: {
      const double c = e.value();
      if (c == 0.0) return Expr::constant(0.0);
      const Expr lowered = c == 1.0 ? Expr::constant(1.0) : c == 2.0 ? u : Expr::power(u, c - 1.0);
      return mul(mul(Expr::constant(c), lowered), du);
    }
    default:
      break;
  }
  const Expr v = e.rhs();
  const Expr dv = derive(v);
  switch (e.op()) {
    case Op::add:
      return add(du, dv);
    case Op::sub:
      return sub(du, dv);
    case Op::mul:
      return add(mul(du, v), mul(u, dv));
    case Op::div:
      return div(sub(mul(du, v), mul(u, dv)), Expr::power(v, 2.0));
    default:
      return Expr::constant(0.0);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

Expr::Expr() : root_(make_node(Op::constant, 0.0)) {}

Expr Expr::constant(double v) {
  if (std::signbit(v)) {
    if (v == 0.0) return Expr(make_node(Op::constant, 0.0));
    return unary(Op::negate, Expr(make_node(Op::constant, -v)));
  }
  return Expr(make_node(Op::constant, v));
}

Expr Expr::variable() { return Expr(make_node(Op::variable)); }

Expr Expr::unary(Op op, Expr arg) { return Expr(make_node(op, 0.0, std::move(arg.root_))); }

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  return Expr(make_node(op, 0.0, std::move(lhs.root_), std::move(rhs.root_)));
}

Expr Expr::power(Expr base, double exponent) {
  return Expr(make_node(Op::pow, exponent == 0.0 ? 0.0 : exponent, std::move(base.root_)));
}

bool Expr::is_closed() const { return !contains(Op::variable); }

bool Expr::contains(Op op) const { return node_contains(root_.get(), op); }

double Expr::operator()(double x) const { return eval(*root_, x); }

std::string Expr::str() const {
  std::string out;
  print(*root_, out);
  return out;
}

bool operator==(const Expr& a, const Expr& b) { return nodes_equal(a.root_.get(), b.root_.get()); }

Expr parse(std::string_view text) { return Parser(text).run(); }

double evaluate(const Expr& e, double x) { return eval(e.node(), x); }

Expr differentiate(const Expr& e) { return derive(e); }

std::string to_string(const Expr& e) { return e.str(); }

double sup_norm(const Expr& e, Interval iv, std::size_t n) {
  if (n < 2) throw ValidationError("sup_norm needs at least 2 grid steps");
  double best = 0.0;
  const double h = iv.length() / static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = i == n ? iv.hi : iv.lo + h * static_cast<double>(i);
    best = std::max(best, std::fabs(evaluate(e, x)));
  }
  return best;
}

double derivative_sup(const Expr& e, Interval iv, std::size_t n) {
  const Expr d = differentiate(e);
  if (!e.contains(Op::abs)) return sup_norm(d, iv, n);
  if (n < 2) throw ValidationError("derivative_sup needs at least 2 grid steps");
  double best = 0.0;
  const double h = iv.length() / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    best = std::max(best, std::fabs(evaluate(d, iv.lo + h * (static_cast<double>(i) + 0.5))));
  }
  return best;
}

}  // namespace fif::expr
