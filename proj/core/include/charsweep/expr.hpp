#ifndef CHARSWEEP_EXPR_HPP
#define CHARSWEEP_EXPR_HPP

#include <memory>
#include <string>
#include <vector>

#include "charsweep/common.hpp"

namespace charsweep {

// Closed symbolic expressions in a single variable x. Differentiation maps
// expressions to expressions, so side derivatives of any order stay exact.
enum class ExprKind {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // child ^ exponent, exponent a fixed rational stored as double
  Exp,
  Ln,
  Sin,
  Cos,
  Negate,
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  double value = 0.0;  // Constant value, or Pow exponent
  Expr a, b;           // children (a only for unary kinds)
};

Expr make_const(double v);
Expr make_var();
Expr make_add(Expr a, Expr b);
Expr make_sub(Expr a, Expr b);
Expr make_mul(Expr a, Expr b);
Expr make_div(Expr a, Expr b);
Expr make_pow(Expr base, double exponent);
Expr make_exp(Expr a);
Expr make_ln(Expr a);
Expr make_sin(Expr a);
Expr make_cos(Expr a);
Expr make_neg(Expr a);

double eval_expr(const Expr& e, double x);
Expr differentiate(const Expr& e);
// Replace the variable with another expression (used to build G'(f(x))).
Expr substitute(const Expr& e, const Expr& replacement);
std::string expr_to_string(const Expr& e);

// Parse the expression grammar: + - * / ^, exp( ) ln( ) sin( ) cos( ),
// variable x, decimal literals, unary minus, ^ with a literal or (p/q)
// rational exponent. Throws ErrorCode::ParseError with position info.
Expr parse_expression(const std::string& text);

}  // namespace charsweep

#endif  // CHARSWEEP_EXPR_HPP
