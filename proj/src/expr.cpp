#include "expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace nullcollapse {

namespace {

constexpr double kPiValue = 3.14159265358979323846;

struct FunctionEntry {
  const char* name;
  ExprOp op;
};

constexpr FunctionEntry kFunctions[] = {
    {"sin", ExprOp::kSin},   {"cos", ExprOp::kCos},  {"tan", ExprOp::kTan},
    {"sinh", ExprOp::kSinh}, {"cosh", ExprOp::kCosh}, {"exp", ExprOp::kExp},
    {"log", ExprOp::kLog},   {"sqrt", ExprOp::kSqrt},
};

bool lookup_function(std::string_view name, ExprOp* op) {
  for (const auto& f : kFunctions) {
    if (name == f.name) {
      *op = f.op;
      return true;
    }
  }
  return false;
}

bool is_integer_value(double v) {
  return std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15;
}

}  // namespace

bool is_function(ExprOp op) {
  return op >= ExprOp::kSin && op <= ExprOp::kSqrt;
}

const char* function_name(ExprOp op) {
  for (const auto& f : kFunctions) {
    if (f.op == op) return f.name;
  }
  return "?";
}

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what), offset_(offset) {}

Expr::Expr() : node_(std::make_shared<ExprNode>(ExprNode{ExprOp::kConstant})) {}

Expr Expr::constant(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::kConstant;
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::kVariable;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::pi() {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::kPi;
  return Expr(std::move(n));
}

Expr Expr::unary(ExprOp op, const Expr& a) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = a.ptr();
  return Expr(std::move(n));
}

Expr Expr::binary(ExprOp op, const Expr& a, const Expr& b) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = a.ptr();
  n->rhs = b.ptr();
  return Expr(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) {
  return Expr::binary(ExprOp::kAdd, a, b);
}
Expr operator-(const Expr& a, const Expr& b) {
  return Expr::binary(ExprOp::kSub, a, b);
}
Expr operator*(const Expr& a, const Expr& b) {
  return Expr::binary(ExprOp::kMul, a, b);
}
Expr operator/(const Expr& a, const Expr& b) {
  return Expr::binary(ExprOp::kDiv, a, b);
}
Expr operator-(const Expr& a) { return Expr::unary(ExprOp::kNeg, a); }
Expr pow(const Expr& a, const Expr& b) {
  return Expr::binary(ExprOp::kPow, a, b);
}
Expr pow(const Expr& a, double e) { return pow(a, Expr::constant(e)); }
Expr sqrt(const Expr& a) { return Expr::unary(ExprOp::kSqrt, a); }

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse() {
    Expr e = parse_expr_rule();
    skip_ws();
    if (pos_ != src_.size()) {
      fail("unexpected trailing input");
    }
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError("syntax error at offset " + std::to_string(pos_) + ": " +
                         message,
                     pos_);
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool peek_is(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool consume(char c) {
    if (peek_is(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr_rule() {
    Expr e = parse_term();
    for (;;) {
      if (consume('+')) {
        e = e + parse_term();
      } else if (consume('-')) {
        e = e - parse_term();
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (consume('*')) {
        e = e * parse_unary();
      } else if (consume('/')) {
        e = e / parse_unary();
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (consume('-')) {
      return -parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (consume('^')) {
      // Right-associative; the exponent may carry a sign.
      return pow(base, parse_unary());
    }
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) {
      fail("unexpected end of input");
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return parse_name();
    }
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr_rule();
      if (!consume(')')) {
        fail("expected ')'");
      }
      return e;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
      }
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
        ++pos_;
      }
      if (pos_ < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          ++pos_;
        }
      } else {
        pos_ = mark;  // a bare 'e' belongs to the next token
      }
    }
    double value = 0.0;
    auto [end, ec] =
        std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || end != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(value);
  }

  Expr parse_name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_')) {
      ++pos_;
    }
    std::string_view name = src_.substr(start, pos_ - start);
    if (peek_is('(')) {
      ExprOp op;
      if (!lookup_function(name, &op)) {
        pos_ = start;
        fail("unknown function '" + std::string(name) + "'");
      }
      ++pos_;  // '('
      Expr arg = parse_expr_rule();
      if (!consume(')')) {
        fail("expected ')'");
      }
      return Expr::unary(op, arg);
    }
    if (name == "pi") {
      return Expr::pi();
    }
    return Expr::variable(std::string(name));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view source) { return Parser(source).parse(); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double apply_function(ExprOp op, double a) {
  switch (op) {
    case ExprOp::kSin:
      return std::sin(a);
    case ExprOp::kCos:
      return std::cos(a);
    case ExprOp::kTan:
      return std::tan(a);
    case ExprOp::kSinh:
      return std::sinh(a);
    case ExprOp::kCosh:
      return std::cosh(a);
    case ExprOp::kExp:
      return std::exp(a);
    case ExprOp::kLog:
      if (a <= 0.0) throw EvalError("log of non-positive value");
      return std::log(a);
    case ExprOp::kSqrt:
      if (a < 0.0) throw EvalError("sqrt of negative value");
      return std::sqrt(a);
    default:
      throw EvalError("not a function");
  }
}

double apply_pow(double a, double b) {
  if (a == 0.0 && b < 0.0) throw EvalError("zero raised to negative power");
  if (a < 0.0 && !is_integer_value(b)) {
    throw EvalError("negative base with non-integer exponent");
  }
  return std::pow(a, b);
}

struct Evaluator {
  const Binding& binding;
  std::unordered_map<const ExprNode*, double> memo;

  double run(const ExprNode* n) {
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    double v;
    switch (n->op) {
      case ExprOp::kConstant:
        v = n->value;
        break;
      case ExprOp::kPi:
        v = kPiValue;
        break;
      case ExprOp::kVariable: {
        auto b = binding.find(n->name);
        if (b == binding.end()) {
          throw EvalError("unbound variable '" + n->name + "'");
        }
        v = b->second;
        break;
      }
      case ExprOp::kNeg:
        v = -run(n->lhs.get());
        break;
      case ExprOp::kAdd:
        v = run(n->lhs.get()) + run(n->rhs.get());
        break;
      case ExprOp::kSub:
        v = run(n->lhs.get()) - run(n->rhs.get());
        break;
      case ExprOp::kMul:
        v = run(n->lhs.get()) * run(n->rhs.get());
        break;
      case ExprOp::kDiv: {
        double num = run(n->lhs.get());
        double den = run(n->rhs.get());
        if (den == 0.0) throw EvalError("division by zero");
        v = num / den;
        break;
      }
      case ExprOp::kPow:
        v = apply_pow(run(n->lhs.get()), run(n->rhs.get()));
        break;
      default:
        v = apply_function(n->op, run(n->lhs.get()));
        break;
    }
    memo.emplace(n, v);
    return v;
  }
};

}  // namespace

double evaluate(const Expr& e, const Binding& binding) {
  Evaluator ev{binding, {}};
  return ev.run(e.raw());
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

struct Differentiator {
  std::string_view var;
  std::unordered_map<const ExprNode*, Expr> memo;

  Expr run(const ExprPtr& p) {
    auto it = memo.find(p.get());
    if (it != memo.end()) return it->second;
    Expr d = derive(*p);
    memo.emplace(p.get(), d);
    return d;
  }

  Expr derive(const ExprNode& n) {
    const Expr zero = Expr::constant(0.0);
    switch (n.op) {
      case ExprOp::kConstant:
      case ExprOp::kPi:
        return zero;
      case ExprOp::kVariable:
        return n.name == var ? Expr::constant(1.0) : zero;
      case ExprOp::kNeg:
        return -run(n.lhs);
      case ExprOp::kAdd:
        return run(n.lhs) + run(n.rhs);
      case ExprOp::kSub:
        return run(n.lhs) - run(n.rhs);
      case ExprOp::kMul:
        return wrap(n.lhs) * run(n.rhs) + run(n.lhs) * wrap(n.rhs);
      case ExprOp::kDiv: {
        Expr u = wrap(n.lhs), v = wrap(n.rhs);
        return (run(n.lhs) * v - u * run(n.rhs)) / (v * v);
      }
      case ExprOp::kPow: {
        Expr u = wrap(n.lhs), v = wrap(n.rhs);
        if (n.rhs->op == ExprOp::kConstant) {
          double c = n.rhs->value;
          return Expr::constant(c) * pow(u, Expr::constant(c - 1.0)) *
                 run(n.lhs);
        }
        // General case through u^v = exp(v log u); needs u > 0 to evaluate.
        return pow(u, v) *
               (run(n.rhs) * Expr::unary(ExprOp::kLog, u) + v * run(n.lhs) / u);
      }
      case ExprOp::kSin:
        return Expr::unary(ExprOp::kCos, wrap(n.lhs)) * run(n.lhs);
      case ExprOp::kCos:
        return -(Expr::unary(ExprOp::kSin, wrap(n.lhs)) * run(n.lhs));
      case ExprOp::kTan: {
        Expr c = Expr::unary(ExprOp::kCos, wrap(n.lhs));
        return run(n.lhs) / (c * c);
      }
      case ExprOp::kSinh:
        return Expr::unary(ExprOp::kCosh, wrap(n.lhs)) * run(n.lhs);
      case ExprOp::kCosh:
        return Expr::unary(ExprOp::kSinh, wrap(n.lhs)) * run(n.lhs);
      case ExprOp::kExp:
        return Expr::unary(ExprOp::kExp, wrap(n.lhs)) * run(n.lhs);
      case ExprOp::kLog:
        return run(n.lhs) / wrap(n.lhs);
      case ExprOp::kSqrt:
        return run(n.lhs) /
               (Expr::constant(2.0) * Expr::unary(ExprOp::kSqrt, wrap(n.lhs)));
    }
    throw EvalError("unhandled node in differentiate");
  }

  static Expr wrap(const ExprPtr& p) { return Expr::from_ptr(p); }
};

}  // namespace

Expr differentiate(const Expr& e, std::string_view var) {
  Differentiator d{var, {}};
  return d.run(e.ptr());
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

struct Simplifier {
  std::unordered_map<const ExprNode*, Expr> memo;

  Expr run(const ExprPtr& p) {
    auto it = memo.find(p.get());
    if (it != memo.end()) return it->second;
    Expr s = simp(p);
    memo.emplace(p.get(), s);
    return s;
  }

  static bool is_const(const Expr& e, double* v) {
    if (e.node().op == ExprOp::kConstant) {
      *v = e.node().value;
      return true;
    }
    return false;
  }

  Expr simp(const ExprPtr& p) {
    const ExprNode& n = *p;
    switch (n.op) {
      case ExprOp::kConstant:
      case ExprOp::kPi:
      case ExprOp::kVariable:
        return Expr::from_ptr(p);
      case ExprOp::kNeg: {
        Expr a = run(n.lhs);
        double v;
        if (is_const(a, &v)) return Expr::constant(-v);
        if (a.node().op == ExprOp::kNeg) return Expr::from_ptr(a.node().lhs);
        return -a;
      }
      case ExprOp::kAdd: {
        Expr a = run(n.lhs), b = run(n.rhs);
        double va, vb;
        bool ca = is_const(a, &va), cb = is_const(b, &vb);
        if (ca && cb) return Expr::constant(va + vb);
        if (ca && va == 0.0) return b;
        if (cb && vb == 0.0) return a;
        return a + b;
      }
      case ExprOp::kSub: {
        Expr a = run(n.lhs), b = run(n.rhs);
        double va, vb;
        bool ca = is_const(a, &va), cb = is_const(b, &vb);
        if (ca && cb) return Expr::constant(va - vb);
        if (cb && vb == 0.0) return a;
        if (ca && va == 0.0) return simp_neg(b);
        return a - b;
      }
      case ExprOp::kMul: {
        Expr a = run(n.lhs), b = run(n.rhs);
        double va, vb;
        bool ca = is_const(a, &va), cb = is_const(b, &vb);
        if (ca && cb) return Expr::constant(va * vb);
        if ((ca && va == 0.0) || (cb && vb == 0.0)) return Expr::constant(0.0);
        if (ca && va == 1.0) return b;
        if (cb && vb == 1.0) return a;
        return a * b;
      }
      case ExprOp::kDiv: {
        Expr a = run(n.lhs), b = run(n.rhs);
        double va, vb;
        bool ca = is_const(a, &va), cb = is_const(b, &vb);
        if (cb && vb == 0.0) return a / b;  // leave the error for evaluation
        if (ca && cb) return Expr::constant(va / vb);
        if (ca && va == 0.0) return Expr::constant(0.0);
        if (cb && vb == 1.0) return a;
        return a / b;
      }
      case ExprOp::kPow: {
        Expr a = run(n.lhs), b = run(n.rhs);
        double va, vb;
        bool ca = is_const(a, &va), cb = is_const(b, &vb);
        if (ca && cb) {
          try {
            return Expr::constant(apply_pow(va, vb));
          } catch (const EvalError&) {
            return pow(a, b);
          }
        }
        if (cb && vb == 1.0) return a;
        if (cb && vb == 0.0) return Expr::constant(1.0);
        if (ca && va == 1.0) return Expr::constant(1.0);
        return pow(a, b);
      }
      default: {  // unary functions
        Expr a = run(n.lhs);
        double va;
        if (is_const(a, &va)) {
          try {
            return Expr::constant(apply_function(n.op, va));
          } catch (const EvalError&) {
          }
        }
        return Expr::unary(n.op, a);
      }
    }
  }

  Expr simp_neg(const Expr& a) {
    double v;
    if (is_const(a, &v)) return Expr::constant(-v);
    if (a.node().op == ExprOp::kNeg) return Expr::from_ptr(a.node().lhs);
    return -a;
  }
};

}  // namespace

Expr simplify(const Expr& e) {
  Simplifier s;
  return s.run(e.ptr());
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

struct Substituter {
  const std::map<std::string, Expr>& map;
  std::unordered_map<const ExprNode*, Expr> memo;

  Expr run(const ExprPtr& p) {
    auto it = memo.find(p.get());
    if (it != memo.end()) return it->second;
    Expr s = sub(*p, p);
    memo.emplace(p.get(), s);
    return s;
  }

  Expr sub(const ExprNode& n, const ExprPtr& p) {
    switch (n.op) {
      case ExprOp::kConstant:
      case ExprOp::kPi:
        return Expr::from_ptr(p);
      case ExprOp::kVariable: {
        auto it = map.find(n.name);
        if (it != map.end()) return it->second;
        return Expr::from_ptr(p);
      }
      case ExprOp::kNeg:
      case ExprOp::kSin:
      case ExprOp::kCos:
      case ExprOp::kTan:
      case ExprOp::kSinh:
      case ExprOp::kCosh:
      case ExprOp::kExp:
      case ExprOp::kLog:
      case ExprOp::kSqrt:
        return Expr::unary(n.op, run(n.lhs));
      default:
        return Expr::binary(n.op, run(n.lhs), run(n.rhs));
    }
  }
};

}  // namespace

Expr substitute(const Expr& e, const std::map<std::string, Expr>& map) {
  Substituter s{map, {}};
  return s.run(e.ptr());
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence: add/sub 1, mul/div 2, unary minus 3, pow 4, atoms 5.
int precedence(const ExprNode& n) {
  switch (n.op) {
    case ExprOp::kAdd:
    case ExprOp::kSub:
      return 1;
    case ExprOp::kMul:
    case ExprOp::kDiv:
      return 2;
    case ExprOp::kNeg:
      return 3;
    case ExprOp::kPow:
      return 4;
    default:
      return 5;
  }
}

void print_node(const ExprNode& n, std::string& out);

void print_child(const ExprNode& c, int min_prec, std::string& out) {
  if (precedence(c) < min_prec) {
    out += '(';
    print_node(c, out);
    out += ')';
  } else {
    print_node(c, out);
  }
}

void print_node(const ExprNode& n, std::string& out) {
  switch (n.op) {
    case ExprOp::kConstant: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", n.value);
      out += buf;
      break;
    }
    case ExprOp::kPi:
      out += "pi";
      break;
    case ExprOp::kVariable:
      out += n.name;
      break;
    case ExprOp::kNeg:
      out += '-';
      print_child(*n.lhs, 3, out);
      break;
    case ExprOp::kAdd:
      print_child(*n.lhs, 1, out);
      out += " + ";
      print_child(*n.rhs, 2, out);
      break;
    case ExprOp::kSub:
      print_child(*n.lhs, 1, out);
      out += " - ";
      print_child(*n.rhs, 2, out);
      break;
    case ExprOp::kMul:
      print_child(*n.lhs, 2, out);
      out += "*";
      print_child(*n.rhs, 3, out);
      break;
    case ExprOp::kDiv:
      print_child(*n.lhs, 2, out);
      out += "/";
      print_child(*n.rhs, 3, out);
      break;
    case ExprOp::kPow:
      print_child(*n.lhs, 5, out);
      out += "^";
      print_child(*n.rhs, 3, out);
      break;
    default:
      out += function_name(n.op);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      break;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print_node(e.node(), out);
  return out;
}

namespace {

void collect_vars(const ExprNode* n, std::set<std::string>& out,
                  std::set<const ExprNode*>& seen) {
  if (!n || seen.count(n)) return;
  seen.insert(n);
  if (n->op == ExprOp::kVariable) out.insert(n->name);
  collect_vars(n->lhs.get(), out, seen);
  collect_vars(n->rhs.get(), out, seen);
}

}  // namespace

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  std::set<const ExprNode*> seen;
  collect_vars(e.raw(), out, seen);
  return out;
}

}  // namespace nullcollapse
