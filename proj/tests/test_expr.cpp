#include <doctest.h>

#include <cmath>

#include "expr.hpp"
#include "oracles.hpp"
#include "tape.hpp"

using namespace nullcollapse;
using nullcollapse::testing::RandomExprGen;
using nullcollapse::testing::fd_derivative;

TEST_CASE("parse and evaluate basics") {
  CHECK(evaluate(parse_expr("t"), {{"t", 3.0}}) == doctest::Approx(3.0));
  CHECK(evaluate(parse_expr("2*t + sin(x)^2"), {{"t", 1.0}, {"x", 0.0}}) ==
        doctest::Approx(2.0));
  CHECK(evaluate(parse_expr("7"), {{"q", 99.0}}) == doctest::Approx(7.0));
  CHECK(evaluate(parse_expr("exp(0)"), {}) == doctest::Approx(1.0));
  CHECK(evaluate(parse_expr("t*psi^2"), {{"t", 2.0}, {"psi", 3.0}}) ==
        doctest::Approx(18.0));
  CHECK(evaluate(parse_expr("pi"), {}) == doctest::Approx(M_PI));
  CHECK(evaluate(parse_expr("2e-1 + 1.5"), {}) == doctest::Approx(1.7));
}

TEST_CASE("parse precedence and associativity") {
  // ^ binds tightest, right-associative; unary minus below ^.
  CHECK(evaluate(parse_expr("2^3^2"), {}) == doctest::Approx(512.0));
  CHECK(evaluate(parse_expr("-2^2"), {}) == doctest::Approx(-4.0));
  CHECK(evaluate(parse_expr("(-2)^2"), {}) == doctest::Approx(4.0));
  CHECK(evaluate(parse_expr("2^-1"), {}) == doctest::Approx(0.5));
  CHECK(evaluate(parse_expr("1 - 2 - 3"), {}) == doctest::Approx(-4.0));
  CHECK(evaluate(parse_expr("8/4/2"), {}) == doctest::Approx(1.0));
  CHECK(evaluate(parse_expr("1+2*3"), {}) == doctest::Approx(7.0));
}

TEST_CASE("parse errors carry byte offsets") {
  CHECK_THROWS_AS(parse_expr("sin(x"), ParseError);
  try {
    parse_expr("sin(x");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
  }
  try {
    parse_expr("foo(x)");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 0);
    CHECK(std::string(e.what()).find("unknown function") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_expr("1 + "), ParseError);
  CHECK_THROWS_AS(parse_expr("2x"), ParseError);
}

TEST_CASE("evaluation fails loudly") {
  CHECK_THROWS_AS(evaluate(parse_expr("q"), {}), EvalError);
  CHECK_THROWS_AS(evaluate(parse_expr("log(0 - 1)"), {}), EvalError);
  CHECK_THROWS_AS(evaluate(parse_expr("sqrt(0 - 2)"), {}), EvalError);
  CHECK_THROWS_AS(evaluate(parse_expr("1/(t - t)"), {{"t", 1.0}}), EvalError);
  CHECK_THROWS_AS(evaluate(parse_expr("(0-2)^0.5"), {}), EvalError);
}

TEST_CASE("differentiate known cases") {
  Binding at{{"t", 2.0}, {"psi", 3.0}};
  CHECK(evaluate(differentiate(parse_expr("t*psi^2"), "psi"), at) ==
        doctest::Approx(12.0));
  CHECK(evaluate(differentiate(parse_expr("sin(x)"), "x"), {{"x", 0.0}}) ==
        doctest::Approx(1.0));
  CHECK(evaluate(differentiate(parse_expr("sqrt(t)"), "t"), {{"t", 4.0}}) ==
        doctest::Approx(0.25));
  CHECK(evaluate(differentiate(parse_expr("exp(2*t)"), "t"), {{"t", 0.5}}) ==
        doctest::Approx(2.0 * std::exp(1.0)));
}

TEST_CASE("derivatives match central finite differences on random expressions") {
  RandomExprGen gen(12345);
  int tested = 0;
  int attempts = 0;
  while (tested < 200 && attempts < 4000) {
    ++attempts;
    Expr e = gen.gen(4);
    Binding at = gen.random_point();
    const std::string var = "x";
    auto fd5 = fd_derivative(e, at, var, 1e-5);
    auto fd4 = fd_derivative(e, at, var, 1e-4);
    if (!fd5 || !fd4) continue;
    if (!std::isfinite(*fd5) || !std::isfinite(*fd4)) continue;
    // Keep only points where the difference quotient itself has converged,
    // so the oracle is trustworthy.
    if (std::abs(*fd5 - *fd4) > 5e-7 * (1.0 + std::abs(*fd5))) continue;
    double sym;
    try {
      sym = evaluate(differentiate(e, var), at);
    } catch (const EvalError&) {
      continue;
    }
    REQUIRE(std::isfinite(sym));
    CHECK(std::abs(sym - *fd5) <= 1e-6 * (1.0 + std::abs(*fd5)));
    ++tested;
  }
  CHECK(tested == 200);
}

TEST_CASE("simplify folds constants and strips identities") {
  CHECK(to_string(simplify(parse_expr("0*x + y"))) == "y");
  CHECK(to_string(simplify(parse_expr("1*sin(t)"))) == "sin(t)");
  CHECK(to_string(simplify(parse_expr("2*3"))) == "6");
  CHECK(to_string(simplify(parse_expr("x^1"))) == "x");
  CHECK(to_string(simplify(parse_expr("x - 0"))) == "x");
  CHECK(to_string(simplify(parse_expr("0/cos(x)"))) == "0");
  CHECK(to_string(simplify(parse_expr("sqrt(1)"))) == "1");
}

TEST_CASE("simplify preserves evaluation at random points") {
  RandomExprGen gen(777);
  for (int i = 0; i < 100; ++i) {
    Expr e = gen.gen(4);
    Expr s = simplify(e);
    Binding at = gen.random_point();
    double ve, vs;
    try {
      ve = evaluate(e, at);
      vs = evaluate(s, at);
    } catch (const EvalError&) {
      continue;
    }
    CHECK(std::abs(ve - vs) <= 1e-12 * (1.0 + std::abs(ve)));
  }
}

TEST_CASE("print then parse round-trips") {
  RandomExprGen gen(4242);
  for (int i = 0; i < 80; ++i) {
    Expr e = gen.gen(4);
    std::string once = to_string(e);
    std::string twice = to_string(parse_expr(once));
    CHECK(once == twice);
    Binding at = gen.random_point();
    try {
      double ve = evaluate(e, at);
      double vp = evaluate(parse_expr(once), at);
      CHECK(ve == doctest::Approx(vp).epsilon(1e-12));
    } catch (const EvalError&) {
    }
  }
  // Fixed regressions for parenthesization.
  CHECK(to_string(parse_expr(to_string(parse_expr("(-x)^2")))) ==
        to_string(parse_expr("(-x)^2")));
  CHECK(to_string(parse_expr(to_string(parse_expr("a - (b - c)")))) ==
        to_string(parse_expr("a - (b - c)")));
  CHECK(to_string(parse_expr(to_string(parse_expr("(x^y)^z")))) ==
        to_string(parse_expr("(x^y)^z")));
}

TEST_CASE("substitute replaces variables simultaneously") {
  Expr e = parse_expr("x + y*x");
  std::map<std::string, Expr> m{{"x", parse_expr("y")},
                                {"y", parse_expr("x")}};
  Expr s = substitute(e, m);
  CHECK(evaluate(s, {{"x", 5.0}, {"y", 2.0}}) == doctest::Approx(2.0 + 10.0));
  auto vars = free_variables(parse_expr("sin(a) + b*c"));
  CHECK(vars == std::set<std::string>{"a", "b", "c"});
}

TEST_CASE("tape evaluation matches the interpreter") {
  RandomExprGen gen(99);
  std::vector<std::string> vars{"x", "y", "t"};
  for (int i = 0; i < 40; ++i) {
    std::vector<Expr> outs{gen.gen(4), gen.gen(3), gen.gen(2)};
    Tape tape(outs, vars);
    Binding at = gen.random_point();
    std::vector<double> in{at["x"], at["y"], at["t"]};
    std::vector<double> slots(tape.slot_count()), out(tape.output_count());
    bool interp_threw = false;
    std::vector<double> expected;
    try {
      for (auto& e : outs) expected.push_back(evaluate(e, at));
    } catch (const EvalError&) {
      interp_threw = true;
    }
    if (interp_threw) continue;
    tape.eval(in, slots, out);
    for (std::size_t k = 0; k < outs.size(); ++k) {
      CHECK(out[k] == doctest::Approx(expected[k]).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(Tape(std::vector<Expr>{parse_expr("q + 1")},
                       std::vector<std::string>{"x"}),
                  EvalError);
}
