// Scalar analytic expressions: parsing, evaluation, exact symbolic
// differentiation and light simplification. Expressions are immutable
// trees shared through shared_ptr, so they are safe to evaluate from
// many threads at once.
#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nullcollapse {

enum class ExprOp : unsigned char {
  kConstant,
  kVariable,
  kPi,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kSin,
  kCos,
  kTan,
  kSinh,
  kCosh,
  kExp,
  kLog,
  kSqrt,
};

bool is_function(ExprOp op);
const char* function_name(ExprOp op);

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprOp op;
  double value = 0.0;  // kConstant
  std::string name;    // kVariable
  ExprPtr lhs, rhs;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Unbound variables and domain violations (log of a non-positive value,
// division by zero, sqrt of a negative) are reported through this, never
// as silent NaN.
class EvalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Binding = std::map<std::string, double>;

class Expr {
 public:
  Expr();  // the constant 0
  static Expr constant(double v);
  static Expr variable(std::string name);
  static Expr pi();
  static Expr unary(ExprOp op, const Expr& a);
  static Expr binary(ExprOp op, const Expr& a, const Expr& b);
  // Re-wraps an existing node without copying the subtree.
  static Expr from_ptr(ExprPtr p) { return Expr(std::move(p)); }

  const ExprNode& node() const { return *node_; }
  const ExprNode* raw() const { return node_.get(); }
  ExprPtr ptr() const { return node_; }

  bool is_constant() const { return node_->op == ExprOp::kConstant; }
  bool is_constant(double v) const {
    return is_constant() && node_->value == v;
  }

 private:
  explicit Expr(ExprPtr p) : node_(std::move(p)) {}
  ExprPtr node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, const Expr& b);
Expr pow(const Expr& a, double e);
Expr sqrt(const Expr& a);

// Grammar: expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)* ;
// unary := '-' unary | power ; power := atom ('^' unary)? ;
// atom := number | name | name '(' expr ')' | '(' expr ')'.
// '^' binds tightest and associates to the right; whitespace is insignificant.
Expr parse_expr(std::string_view source);

double evaluate(const Expr& e, const Binding& binding);
Expr differentiate(const Expr& e, std::string_view var);
// Constant folding plus 0/1 identity elimination only; evaluation-equivalent
// on the common domain.
Expr simplify(const Expr& e);
// Simultaneous substitution of variables by expressions.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& map);
std::string to_string(const Expr& e);
std::set<std::string> free_variables(const Expr& e);

}  // namespace nullcollapse
