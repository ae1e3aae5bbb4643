// Test-only oracles kept independent of the implementation paths they check:
// central finite differences for derivatives and a grammar-driven random
// expression generator.
#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "expr.hpp"

namespace nullcollapse::testing {

// Central finite difference of an expression in one variable.
inline std::optional<double> fd_derivative(const Expr& e, const Binding& at,
                                           const std::string& var,
                                           double step) {
  Binding up = at, down = at;
  up[var] += step;
  down[var] -= step;
  try {
    return (evaluate(e, up) - evaluate(e, down)) / (2.0 * step);
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

// Central finite difference of a plain function.
inline double fd_derivative(const std::function<double(double)>& f, double x,
                            double step) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

struct RandomExprGen {
  std::mt19937 rng;
  std::vector<std::string> vars;

  explicit RandomExprGen(unsigned seed,
                         std::vector<std::string> variables = {"x", "y", "t"})
      : rng(seed), vars(std::move(variables)) {}

  Expr leaf() {
    std::uniform_real_distribution<double> c(0.3, 2.5);
    if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
      return Expr::constant(c(rng));
    }
    std::uniform_int_distribution<int> pick(0, static_cast<int>(vars.size()) - 1);
    return Expr::variable(vars[pick(rng)]);
  }

  Expr gen(int depth) {
    if (depth <= 0) return leaf();
    switch (std::uniform_int_distribution<int>(0, 9)(rng)) {
      case 0:
        return gen(depth - 1) + gen(depth - 1);
      case 1:
        return gen(depth - 1) - gen(depth - 1);
      case 2:
        return gen(depth - 1) * gen(depth - 1);
      case 3:
        // Shift the divisor away from zero.
        return gen(depth - 1) / (gen(depth - 1) + Expr::constant(3.0));
      case 4: {
        std::uniform_int_distribution<int> ex(-2, 3);
        return pow(gen(depth - 1) + Expr::constant(3.5),
                   static_cast<double>(ex(rng)));
      }
      case 5:
        return Expr::unary(ExprOp::kSin, gen(depth - 1));
      case 6:
        return Expr::unary(ExprOp::kCos, gen(depth - 1));
      case 7:
        return Expr::unary(ExprOp::kLog,
                           gen(depth - 1) + Expr::constant(4.0));
      case 8:
        return Expr::unary(ExprOp::kSqrt,
                           gen(depth - 1) + Expr::constant(4.0));
      default:
        return Expr::unary(ExprOp::kExp,
                           gen(depth - 1) * Expr::constant(0.3));
    }
  }

  Binding random_point() {
    std::uniform_real_distribution<double> d(0.4, 1.7);
    Binding b;
    for (const auto& v : vars) b[v] = d(rng);
    return b;
  }
};

}  // namespace nullcollapse::testing
