#include "kropina/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace kropina {

namespace {

bool is_const(const ExprPtr& e, double v) {
  return e->kind == ExprKind::Constant && e->value == v;
}

ExprPtr node(ExprKind k, ExprPtr a = nullptr, ExprPtr b = nullptr) {
  auto e = std::make_shared<Expr>(k);
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

}  // namespace

ExprPtr constant(double v) {
  auto e = std::make_shared<Expr>(ExprKind::Constant);
  e->value = v;
  return e;
}

ExprPtr variable(int index) {
  auto e = std::make_shared<Expr>(ExprKind::Variable);
  e->var = index;
  return e;
}

ExprPtr operator+(const ExprPtr& x, const ExprPtr& y) {
  if (x->kind == ExprKind::Constant && y->kind == ExprKind::Constant) {
    return constant(x->value + y->value);
  }
  if (is_const(x, 0)) return y;
  if (is_const(y, 0)) return x;
  return node(ExprKind::Add, x, y);
}

ExprPtr operator-(const ExprPtr& x, const ExprPtr& y) {
  if (x->kind == ExprKind::Constant && y->kind == ExprKind::Constant) {
    return constant(x->value - y->value);
  }
  if (is_const(y, 0)) return x;
  if (is_const(x, 0)) return -y;
  return node(ExprKind::Sub, x, y);
}

ExprPtr operator*(const ExprPtr& x, const ExprPtr& y) {
  if (x->kind == ExprKind::Constant && y->kind == ExprKind::Constant) {
    return constant(x->value * y->value);
  }
  if (is_const(x, 0) || is_const(y, 0)) return constant(0);
  if (is_const(x, 1)) return y;
  if (is_const(y, 1)) return x;
  return node(ExprKind::Mul, x, y);
}

ExprPtr operator/(const ExprPtr& x, const ExprPtr& y) {
  if (x->kind == ExprKind::Constant && y->kind == ExprKind::Constant && y->value != 0) {
    return constant(x->value / y->value);
  }
  if (is_const(x, 0)) return constant(0);
  if (is_const(y, 1)) return x;
  return node(ExprKind::Div, x, y);
}

ExprPtr operator-(const ExprPtr& x) {
  if (x->kind == ExprKind::Constant) return constant(-x->value);
  if (x->kind == ExprKind::Neg) return x->a;
  return node(ExprKind::Neg, x);
}

ExprPtr pow_expr(const ExprPtr& x, const ExprPtr& y) {
  if (x->kind == ExprKind::Constant && y->kind == ExprKind::Constant) {
    return constant(std::pow(x->value, y->value));
  }
  if (is_const(y, 1)) return x;
  if (is_const(y, 0)) return constant(1);
  return node(ExprKind::Pow, x, y);
}

ExprPtr sin_expr(const ExprPtr& x) {
  if (x->kind == ExprKind::Constant) return constant(std::sin(x->value));
  return node(ExprKind::Sin, x);
}
ExprPtr cos_expr(const ExprPtr& x) {
  if (x->kind == ExprKind::Constant) return constant(std::cos(x->value));
  return node(ExprKind::Cos, x);
}
ExprPtr exp_expr(const ExprPtr& x) {
  if (x->kind == ExprKind::Constant) return constant(std::exp(x->value));
  return node(ExprKind::Exp, x);
}
ExprPtr log_expr(const ExprPtr& x) {
  if (x->kind == ExprKind::Constant) return constant(std::log(x->value));
  return node(ExprKind::Log, x);
}
ExprPtr sqrt_expr(const ExprPtr& x) {
  if (x->kind == ExprKind::Constant) return constant(std::sqrt(x->value));
  return node(ExprKind::Sqrt, x);
}

double eval(const ExprPtr& e, std::span<const double> vars) {
  switch (e->kind) {
    case ExprKind::Constant: return e->value;
    case ExprKind::Variable: return vars[e->var];
    case ExprKind::Add: return eval(e->a, vars) + eval(e->b, vars);
    case ExprKind::Sub: return eval(e->a, vars) - eval(e->b, vars);
    case ExprKind::Mul: return eval(e->a, vars) * eval(e->b, vars);
    case ExprKind::Div: return eval(e->a, vars) / eval(e->b, vars);
    case ExprKind::Pow: return std::pow(eval(e->a, vars), eval(e->b, vars));
    case ExprKind::Neg: return -eval(e->a, vars);
    case ExprKind::Sin: return std::sin(eval(e->a, vars));
    case ExprKind::Cos: return std::cos(eval(e->a, vars));
    case ExprKind::Exp: return std::exp(eval(e->a, vars));
    case ExprKind::Log: return std::log(eval(e->a, vars));
    case ExprKind::Sqrt: return std::sqrt(eval(e->a, vars));
  }
  return 0;
}

double eval(const ExprPtr& e, const Vec& vars) {
  return eval(e, std::span<const double>(vars.data(), vars.size()));
}

ExprPtr diff(const ExprPtr& e, int var) {
  switch (e->kind) {
    case ExprKind::Constant: return constant(0);
    case ExprKind::Variable: return constant(e->var == var ? 1 : 0);
    case ExprKind::Add: return diff(e->a, var) + diff(e->b, var);
    case ExprKind::Sub: return diff(e->a, var) - diff(e->b, var);
    case ExprKind::Mul: return diff(e->a, var) * e->b + e->a * diff(e->b, var);
    case ExprKind::Div:
      return (diff(e->a, var) * e->b - e->a * diff(e->b, var)) / (e->b * e->b);
    case ExprKind::Pow: {
      // d(a^b) = a^b * (b' log a + b a'/a); constant exponent shortcut
      if (e->b->kind == ExprKind::Constant) {
        const double p = e->b->value;
        return constant(p) * pow_expr(e->a, constant(p - 1)) * diff(e->a, var);
      }
      return pow_expr(e->a, e->b) *
             (diff(e->b, var) * log_expr(e->a) + e->b * diff(e->a, var) / e->a);
    }
    case ExprKind::Neg: return -diff(e->a, var);
    case ExprKind::Sin: return cos_expr(e->a) * diff(e->a, var);
    case ExprKind::Cos: return -(sin_expr(e->a) * diff(e->a, var));
    case ExprKind::Exp: return exp_expr(e->a) * diff(e->a, var);
    case ExprKind::Log: return diff(e->a, var) / e->a;
    case ExprKind::Sqrt:
      return diff(e->a, var) / (constant(2) * sqrt_expr(e->a));
  }
  return constant(0);
}

namespace {

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
  }
}

void print(std::ostringstream& os, const ExprPtr& e,
           const std::vector<std::string>& names, int parent_prec) {
  const int prec = precedence(e->kind);
  const bool paren = prec < parent_prec;
  if (paren) os << "(";
  switch (e->kind) {
    case ExprKind::Constant: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << e->value;
      const std::string s = tmp.str();
      if (e->value < 0) {
        os << "(" << s << ")";
      } else {
        os << s;
      }
      break;
    }
    case ExprKind::Variable: os << names[e->var]; break;
    case ExprKind::Add:
      print(os, e->a, names, prec);
      os << " + ";
      print(os, e->b, names, prec);
      break;
    case ExprKind::Sub:
      print(os, e->a, names, prec);
      os << " - ";
      print(os, e->b, names, prec + 1);
      break;
    case ExprKind::Mul:
      print(os, e->a, names, prec);
      os << "*";
      print(os, e->b, names, prec);
      break;
    case ExprKind::Div:
      print(os, e->a, names, prec);
      os << "/";
      print(os, e->b, names, prec + 1);
      break;
    case ExprKind::Pow:
      print(os, e->a, names, prec + 1);
      os << "^";
      print(os, e->b, names, prec);
      break;
    case ExprKind::Neg:
      os << "-";
      print(os, e->a, names, prec + 1);
      break;
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Sqrt: {
      const char* fn = e->kind == ExprKind::Sin   ? "sin"
                       : e->kind == ExprKind::Cos ? "cos"
                       : e->kind == ExprKind::Exp ? "exp"
                       : e->kind == ExprKind::Log ? "log"
                                                  : "sqrt";
      os << fn << "(";
      print(os, e->a, names, 0);
      os << ")";
      break;
    }
  }
  if (paren) os << ")";
}

}  // namespace

std::string to_string(const ExprPtr& e, const std::vector<std::string>& names) {
  std::ostringstream os;
  print(os, e, names, 0);
  return os.str();
}

int node_count(const ExprPtr& e) {
  if (!e) return 0;
  return 1 + node_count(e->a) + node_count(e->b);
}

// ---------------------------------------------------------------------------
// Recursive-descent parser with source positions.

namespace {

struct Lexer {
  std::string_view text;
  size_t pos = 0;
  int line = 1;
  int col = 1;

  void advance(size_t k) {
    for (size_t i = 0; i < k; ++i) {
      if (pos < text.size() && text[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++pos;
    }
  }
  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' ||
                                 text[pos] == '\r' || text[pos] == '\n')) {
      advance(1);
    }
  }
  char peek() const { return pos < text.size() ? text[pos] : '\0'; }
  bool eof() {
    skip_ws();
    return pos >= text.size();
  }
};

class ExprParser {
 public:
  ExprParser(std::string_view text, const std::vector<std::string>& names)
      : lex_{text}, names_(names) {}

  ExprPtr parse() {
    ExprPtr e = parse_sum();
    if (!lex_.eof()) {
      throw SyntaxError("unexpected trailing input", lex_.line, lex_.col);
    }
    return e;
  }

 private:
  ExprPtr parse_sum() {
    ExprPtr e = parse_product();
    for (;;) {
      lex_.skip_ws();
      const char c = lex_.peek();
      if (c == '+') {
        lex_.advance(1);
        e = e + parse_product();
      } else if (c == '-') {
        lex_.advance(1);
        e = e - parse_product();
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_product() {
    ExprPtr e = parse_unary();
    for (;;) {
      lex_.skip_ws();
      const char c = lex_.peek();
      if (c == '*') {
        lex_.advance(1);
        e = e * parse_unary();
      } else if (c == '/') {
        lex_.advance(1);
        e = e / parse_unary();
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_unary() {
    lex_.skip_ws();
    if (lex_.peek() == '-') {
      lex_.advance(1);
      return -parse_unary();
    }
    if (lex_.peek() == '+') {
      lex_.advance(1);
      return parse_unary();
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    lex_.skip_ws();
    if (lex_.peek() == '^') {
      lex_.advance(1);
      // right-associative; exponent may carry a unary sign
      ExprPtr expo = parse_unary_power();
      return pow_expr(base, expo);
    }
    return base;
  }

  ExprPtr parse_unary_power() {
    lex_.skip_ws();
    if (lex_.peek() == '-') {
      lex_.advance(1);
      return -parse_unary_power();
    }
    ExprPtr base = parse_atom();
    lex_.skip_ws();
    if (lex_.peek() == '^') {
      lex_.advance(1);
      return pow_expr(base, parse_unary_power());
    }
    return base;
  }

  ExprPtr parse_atom() {
    lex_.skip_ws();
    const int line = lex_.line, col = lex_.col;
    const char c = lex_.peek();
    if (c == '\0') throw SyntaxError("unexpected end of input", line, col);
    if (c == '(') {
      lex_.advance(1);
      ExprPtr e = parse_sum();
      lex_.skip_ws();
      if (lex_.peek() != ')') {
        throw SyntaxError("expected ')'", lex_.line, lex_.col);
      }
      lex_.advance(1);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return parse_name();
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
  }

  ExprPtr parse_number() {
    const int line = lex_.line, col = lex_.col;
    const size_t start = lex_.pos;
    size_t p = lex_.pos;
    const auto& t = lex_.text;
    while (p < t.size() && (std::isdigit(static_cast<unsigned char>(t[p])) || t[p] == '.')) ++p;
    if (p < t.size() && (t[p] == 'e' || t[p] == 'E')) {
      size_t q = p + 1;
      if (q < t.size() && (t[q] == '+' || t[q] == '-')) ++q;
      if (q < t.size() && std::isdigit(static_cast<unsigned char>(t[q]))) {
        ++q;
        while (q < t.size() && std::isdigit(static_cast<unsigned char>(t[q]))) ++q;
        p = q;
      }
    }
    const std::string token(t.substr(start, p - start));
    try {
      const double v = std::stod(token);
      lex_.advance(p - start);
      return constant(v);
    } catch (...) {
      throw SyntaxError("malformed number '" + token + "'", line, col);
    }
  }

  ExprPtr parse_name() {
    const int line = lex_.line, col = lex_.col;
    const size_t start = lex_.pos;
    size_t p = lex_.pos;
    const auto& t = lex_.text;
    while (p < t.size() && (std::isalnum(static_cast<unsigned char>(t[p])) || t[p] == '_')) ++p;
    const std::string name(t.substr(start, p - start));
    lex_.advance(p - start);
    lex_.skip_ws();
    if (lex_.peek() == '(') {
      lex_.advance(1);
      ExprPtr arg = parse_sum();
      lex_.skip_ws();
      if (lex_.peek() != ')') {
        throw SyntaxError("expected ')' after argument of " + name, lex_.line, lex_.col);
      }
      lex_.advance(1);
      if (name == "sin") return sin_expr(arg);
      if (name == "cos") return cos_expr(arg);
      if (name == "exp") return exp_expr(arg);
      if (name == "log") return log_expr(arg);
      if (name == "sqrt") return sqrt_expr(arg);
      throw UnknownSymbol(name, line, col);
    }
    for (size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return variable(static_cast<int>(i));
    }
    throw UnknownSymbol(name, line, col);
  }

  Lexer lex_;
  const std::vector<std::string>& names_;
};

}  // namespace

ExprPtr parse_expression(std::string_view text, const std::vector<std::string>& names) {
  return ExprParser(text, names).parse();
}

}  // namespace kropina
