// kropina - tiny differentiable expression language for model definitions
#ifndef KROPINA_EXPR_HPP_
#define KROPINA_EXPR_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kropina/types.hpp"

namespace kropina {

/// Grammar: literals, named coordinates, + - * / ^, unary minus, and the
/// functions sin, cos, exp, log, sqrt. Deliberately tiny: every expression is
/// differentiable any number of times by tree rewriting.
class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind : unsigned char {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
};

class Expr {
 public:
  ExprKind kind;
  double value = 0.0;   // Constant
  int var = -1;         // Variable index
  ExprPtr a, b;         // operands

  explicit Expr(ExprKind k) : kind(k) {}
};

ExprPtr constant(double v);
ExprPtr variable(int index);

ExprPtr operator+(const ExprPtr& x, const ExprPtr& y);
ExprPtr operator-(const ExprPtr& x, const ExprPtr& y);
ExprPtr operator*(const ExprPtr& x, const ExprPtr& y);
ExprPtr operator/(const ExprPtr& x, const ExprPtr& y);
ExprPtr operator-(const ExprPtr& x);
ExprPtr pow_expr(const ExprPtr& x, const ExprPtr& y);
ExprPtr sin_expr(const ExprPtr& x);
ExprPtr cos_expr(const ExprPtr& x);
ExprPtr exp_expr(const ExprPtr& x);
ExprPtr log_expr(const ExprPtr& x);
ExprPtr sqrt_expr(const ExprPtr& x);

inline ExprPtr operator+(const ExprPtr& x, double c) { return x + constant(c); }
inline ExprPtr operator*(double c, const ExprPtr& x) { return constant(c) * x; }

double eval(const ExprPtr& e, std::span<const double> vars);
double eval(const ExprPtr& e, const Vec& vars);

/// Exact partial derivative with respect to variable index; simplified.
ExprPtr diff(const ExprPtr& e, int var);

/// Canonical text form; parse(to_string(e)) is semantically e.
std::string to_string(const ExprPtr& e, const std::vector<std::string>& names);

int node_count(const ExprPtr& e);

/// Parse error with 1-based source position.
class SyntaxError : public KropinaError {
 public:
  SyntaxError(const std::string& what, int line, int column)
      : KropinaError(what + " at line " + std::to_string(line) + ", column " +
                     std::to_string(column)),
        line(line),
        column(column) {}
  int line, column;
};

class UnknownSymbol : public KropinaError {
 public:
  UnknownSymbol(const std::string& name, int line, int column)
      : KropinaError("unknown symbol '" + name + "' at line " + std::to_string(line) +
                     ", column " + std::to_string(column)),
        symbol(name),
        line(line),
        column(column) {}
  std::string symbol;
  int line, column;
};

/// Parses one expression over the given coordinate names.
ExprPtr parse_expression(std::string_view text, const std::vector<std::string>& names);

}  // namespace kropina

#endif  // KROPINA_EXPR_HPP_
