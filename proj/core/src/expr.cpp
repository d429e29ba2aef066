#include "charsweep/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace charsweep {

namespace {

Expr node(ExprKind k, double v, Expr a = nullptr, Expr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->value = v;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_const(const Expr& e, double v) { return e->kind == ExprKind::Constant && e->value == v; }
bool is_const(const Expr& e) { return e->kind == ExprKind::Constant; }

double powi(double base, long long n) {
  if (n < 0) return 1.0 / powi(base, -n);
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= base;
    base *= base;
    n >>= 1;
  }
  return r;
}

}  // namespace

Expr make_const(double v) { return node(ExprKind::Constant, v); }
Expr make_var() { return node(ExprKind::Variable, 0.0); }

Expr make_add(Expr a, Expr b) {
  if (is_const(a) && is_const(b)) return make_const(a->value + b->value);
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return node(ExprKind::Add, 0.0, std::move(a), std::move(b));
}

Expr make_sub(Expr a, Expr b) {
  if (is_const(a) && is_const(b)) return make_const(a->value - b->value);
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return make_neg(std::move(b));
  return node(ExprKind::Sub, 0.0, std::move(a), std::move(b));
}

Expr make_mul(Expr a, Expr b) {
  if (is_const(a) && is_const(b)) return make_const(a->value * b->value);
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  return node(ExprKind::Mul, 0.0, std::move(a), std::move(b));
}

Expr make_div(Expr a, Expr b) {
  if (is_const(a) && is_const(b) && b->value != 0.0) return make_const(a->value / b->value);
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return make_const(0.0);
  if (is_const(b, 1.0)) return a;
  return node(ExprKind::Div, 0.0, std::move(a), std::move(b));
}

Expr make_pow(Expr base, double exponent) {
  if (exponent == 0.0) return make_const(1.0);
  if (exponent == 1.0) return base;
  if (is_const(base)) {
    double v = std::pow(base->value, exponent);
    if (std::isfinite(v)) return make_const(v);
  }
  return node(ExprKind::Pow, exponent, std::move(base));
}

Expr make_exp(Expr a) {
  if (is_const(a)) return make_const(std::exp(a->value));
  return node(ExprKind::Exp, 0.0, std::move(a));
}

Expr make_ln(Expr a) {
  if (is_const(a) && a->value > 0.0) return make_const(std::log(a->value));
  return node(ExprKind::Ln, 0.0, std::move(a));
}

Expr make_sin(Expr a) {
  if (is_const(a)) return make_const(std::sin(a->value));
  return node(ExprKind::Sin, 0.0, std::move(a));
}

Expr make_cos(Expr a) {
  if (is_const(a)) return make_const(std::cos(a->value));
  return node(ExprKind::Cos, 0.0, std::move(a));
}

Expr make_neg(Expr a) {
  if (is_const(a)) return make_const(-a->value);
  if (a->kind == ExprKind::Negate) return a->a;
  return node(ExprKind::Negate, 0.0, std::move(a));
}

double eval_expr(const Expr& e, double x) {
  switch (e->kind) {
    case ExprKind::Constant: return e->value;
    case ExprKind::Variable: return x;
    case ExprKind::Add: return eval_expr(e->a, x) + eval_expr(e->b, x);
    case ExprKind::Sub: return eval_expr(e->a, x) - eval_expr(e->b, x);
    case ExprKind::Mul: return eval_expr(e->a, x) * eval_expr(e->b, x);
    case ExprKind::Div: return eval_expr(e->a, x) / eval_expr(e->b, x);
    case ExprKind::Pow: {
      double base = eval_expr(e->a, x);
      double r = e->value;
      if (r == std::nearbyint(r) && std::abs(r) <= 32.0)
        return powi(base, static_cast<long long>(r));
      return std::pow(base, r);
    }
    case ExprKind::Exp: return std::exp(eval_expr(e->a, x));
    case ExprKind::Ln: return std::log(eval_expr(e->a, x));
    case ExprKind::Sin: return std::sin(eval_expr(e->a, x));
    case ExprKind::Cos: return std::cos(eval_expr(e->a, x));
    case ExprKind::Negate: return -eval_expr(e->a, x);
  }
  return std::nan("");
}

Expr differentiate(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Constant: return make_const(0.0);
    case ExprKind::Variable: return make_const(1.0);
    case ExprKind::Add: return make_add(differentiate(e->a), differentiate(e->b));
    case ExprKind::Sub: return make_sub(differentiate(e->a), differentiate(e->b));
    case ExprKind::Mul:
      return make_add(make_mul(differentiate(e->a), e->b), make_mul(e->a, differentiate(e->b)));
    case ExprKind::Div:
      return make_div(
          make_sub(make_mul(differentiate(e->a), e->b), make_mul(e->a, differentiate(e->b))),
          make_pow(e->b, 2.0));
    case ExprKind::Pow:
      return make_mul(make_mul(make_const(e->value), make_pow(e->a, e->value - 1.0)),
                      differentiate(e->a));
    case ExprKind::Exp: return make_mul(make_exp(e->a), differentiate(e->a));
    case ExprKind::Ln: return make_div(differentiate(e->a), e->a);
    case ExprKind::Sin: return make_mul(make_cos(e->a), differentiate(e->a));
    case ExprKind::Cos: return make_neg(make_mul(make_sin(e->a), differentiate(e->a)));
    case ExprKind::Negate: return make_neg(differentiate(e->a));
  }
  return make_const(std::nan(""));
}

Expr substitute(const Expr& e, const Expr& replacement) {
  switch (e->kind) {
    case ExprKind::Constant: return e;
    case ExprKind::Variable: return replacement;
    case ExprKind::Add: return make_add(substitute(e->a, replacement), substitute(e->b, replacement));
    case ExprKind::Sub: return make_sub(substitute(e->a, replacement), substitute(e->b, replacement));
    case ExprKind::Mul: return make_mul(substitute(e->a, replacement), substitute(e->b, replacement));
    case ExprKind::Div: return make_div(substitute(e->a, replacement), substitute(e->b, replacement));
    case ExprKind::Pow: return make_pow(substitute(e->a, replacement), e->value);
    case ExprKind::Exp: return make_exp(substitute(e->a, replacement));
    case ExprKind::Ln: return make_ln(substitute(e->a, replacement));
    case ExprKind::Sin: return make_sin(substitute(e->a, replacement));
    case ExprKind::Cos: return make_cos(substitute(e->a, replacement));
    case ExprKind::Negate: return make_neg(substitute(e->a, replacement));
  }
  return e;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Precedence: Add/Sub 1, Mul/Div 2, Negate 3, Pow 4, atoms 5.
int precedence(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Negate: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
  }
}

std::string render(const Expr& e, int parent_prec) {
  std::string s;
  int prec = precedence(e);
  switch (e->kind) {
    case ExprKind::Constant:
      s = format_double(e->value);
      if (e->value < 0.0) prec = 3;  // parenthesize "-1" inside products etc.
      break;
    case ExprKind::Variable: s = "x"; break;
    case ExprKind::Add: s = render(e->a, 1) + " + " + render(e->b, 2); break;
    case ExprKind::Sub: s = render(e->a, 1) + " - " + render(e->b, 2); break;
    case ExprKind::Mul: s = render(e->a, 2) + "*" + render(e->b, 3); break;
    case ExprKind::Div: s = render(e->a, 2) + "/" + render(e->b, 3); break;
    case ExprKind::Pow: s = render(e->a, 5) + "^" + format_double(e->value); break;
    case ExprKind::Exp: s = "exp(" + render(e->a, 0) + ")"; break;
    case ExprKind::Ln: s = "ln(" + render(e->a, 0) + ")"; break;
    case ExprKind::Sin: s = "sin(" + render(e->a, 0) + ")"; break;
    case ExprKind::Cos: s = "cos(" + render(e->a, 0) + ")"; break;
    case ExprKind::Negate: s = "-" + render(e->a, 3); break;
  }
  if (prec < parent_prec) return "(" + s + ")";
  return s;
}

struct Parser {
  const std::string& text;
  std::size_t pos = 0;

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& what) {
    throw Error(ErrorCode::ParseError,
                "expression syntax error at offset " + std::to_string(pos) + ": " + what,
                static_cast<double>(pos));
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool peek(char c) {
    skip_ws();
    return pos < text.size() && text[pos] == c;
  }

  bool accept(char c) {
    if (peek(c)) { ++pos; return true; }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool number_starts() {
    skip_ws();
    if (pos >= text.size()) return false;
    char c = text[pos];
    return std::isdigit(static_cast<unsigned char>(c)) ||
           (c == '.' && pos + 1 < text.size() &&
            std::isdigit(static_cast<unsigned char>(text[pos + 1])));
  }

  double parse_number() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.'))
      ++pos;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      std::size_t epos = pos + 1;
      if (epos < text.size() && (text[epos] == '+' || text[epos] == '-')) ++epos;
      if (epos < text.size() && std::isdigit(static_cast<unsigned char>(text[epos]))) {
        pos = epos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      }
    }
    if (pos == start) fail("expected number");
    double v;
    auto res = std::from_chars(text.data() + start, text.data() + pos, v);
    if (res.ec != std::errc()) fail("malformed number");
    return v;
  }

  std::string parse_ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
    return text.substr(start, pos - start);
  }

  // exponent := ['-'] (number | '(' ['-'] number '/' number ')')
  double parse_exponent() {
    skip_ws();
    double sign = accept('-') ? -1.0 : 1.0;
    if (accept('(')) {
      double inner_sign = accept('-') ? -1.0 : 1.0;
      double p = parse_number();
      expect('/');
      double q = parse_number();
      expect(')');
      if (q == 0.0) fail("zero denominator in rational exponent");
      return sign * inner_sign * p / q;
    }
    return sign * parse_number();
  }

  Expr parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression");
    if (accept('(')) {
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (number_starts()) return make_const(parse_number());
    std::string id = parse_ident();
    if (id == "x") return make_var();
    if (id == "exp" || id == "ln" || id == "sin" || id == "cos") {
      expect('(');
      Expr arg = parse_expr();
      expect(')');
      if (id == "exp") return make_exp(arg);
      if (id == "ln") return make_ln(arg);
      if (id == "sin") return make_sin(arg);
      return make_cos(arg);
    }
    fail(id.empty() ? "expected value" : "unknown identifier '" + id + "'");
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) return make_pow(base, parse_exponent());
    return base;
  }

  Expr parse_factor() {
    if (accept('-')) return make_neg(parse_factor());
    return parse_power();
  }

  Expr parse_term() {
    Expr e = parse_factor();
    for (;;) {
      if (accept('*')) e = make_mul(e, parse_factor());
      else if (accept('/')) e = make_div(e, parse_factor());
      else return e;
    }
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+')) e = make_add(e, parse_term());
      else if (accept('-')) e = make_sub(e, parse_term());
      else return e;
    }
  }
};

}  // namespace

std::string expr_to_string(const Expr& e) { return render(e, 0); }

Expr parse_expression(const std::string& text) {
  Parser p(text);
  Expr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return e;
}

}  // namespace charsweep
