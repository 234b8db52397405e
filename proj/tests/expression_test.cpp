// Expression DSL: grammar conformance, precedence, evaluation, dual-number
// evaluation, print/parse round-trip, and error reporting with byte offsets.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "orlicz_flow/dual.hpp"
#include "orlicz_flow/errors.hpp"
#include "orlicz_flow/expression.hpp"

using orlicz_flow::Dual;
using orlicz_flow::ExpressionAst;
using orlicz_flow::ParseError;
using orlicz_flow::parse_expression;

namespace {

double eval1(const std::string& text, const std::string& var, double x) {
  return parse_expression(text, {var}).eval1(x);
}

TEST(Expression, PowerTimesExpAtFour) {
  EXPECT_DOUBLE_EQ(eval1("s^(-1) * exp(0)", "s", 4.0), 0.25);
}

TEST(Expression, CosineCombinationAtZero) {
  EXPECT_DOUBLE_EQ(eval1("1 + 0.5*cos(2*t)", "t", 0.0), 1.5);
}

TEST(Expression, MalformedOperatorSequenceOffset) {
  try {
    parse_expression("s +* 2", {"s"});
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
}

TEST(Expression, UnaryMinusBindsTighterThanPower) {
  // factor := unary ('^' factor)?  puts the '-' inside the base.
  EXPECT_DOUBLE_EQ(eval1("-2^2", "s", 1.0), 4.0);
  EXPECT_DOUBLE_EQ(eval1("0 - 2^2", "s", 1.0), -4.0);
}

TEST(Expression, PowerIsRightAssociative) {
  EXPECT_DOUBLE_EQ(eval1("2^3^2", "s", 1.0), 512.0);
}

TEST(Expression, PrecedenceAndParentheses) {
  EXPECT_DOUBLE_EQ(eval1("2 + 3 * 4", "s", 0.0), 14.0);
  EXPECT_DOUBLE_EQ(eval1("(2 + 3) * 4", "s", 0.0), 20.0);
  EXPECT_DOUBLE_EQ(eval1("2 - 3 - 4", "s", 0.0), -5.0);   // left associative
  EXPECT_DOUBLE_EQ(eval1("12 / 3 / 2", "s", 0.0), 2.0);   // left associative
  EXPECT_DOUBLE_EQ(eval1("-s^2", "s", 3.0), 9.0);         // (-s)^2
  EXPECT_DOUBLE_EQ(eval1("0-s^2", "s", 3.0), -9.0);
}

TEST(Expression, NumbersAndConstants) {
  EXPECT_DOUBLE_EQ(eval1("1e3", "s", 0.0), 1000.0);
  EXPECT_DOUBLE_EQ(eval1(".5 + 2.5e-2", "s", 0.0), 0.525);
  EXPECT_DOUBLE_EQ(eval1("cos(pi)", "s", 0.0), -1.0);
  EXPECT_DOUBLE_EQ(eval1("pi", "s", 0.0), M_PI);
}

TEST(Expression, FunctionSet) {
  EXPECT_DOUBLE_EQ(eval1("exp(1)", "s", 0.0), std::exp(1.0));
  EXPECT_DOUBLE_EQ(eval1("log(exp(2))", "s", 0.0), 2.0);
  EXPECT_DOUBLE_EQ(eval1("sin(pi/2)", "s", 0.0), 1.0);
  EXPECT_DOUBLE_EQ(eval1("abs(0-3)", "s", 0.0), 3.0);
  EXPECT_DOUBLE_EQ(eval1("sqrt(16)", "s", 0.0), 4.0);
}

TEST(Expression, MultipleVariablesBindPositionally) {
  const ExpressionAst ast = parse_expression("x1^2 + 2*x2", {"x1", "x2"});
  EXPECT_DOUBLE_EQ(ast.eval(std::vector<double>{3.0, 5.0}), 19.0);
}

TEST(Expression, ErrorUnknownVariable) {
  try {
    parse_expression("x + y", {"x"});
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown variable 'y'"), std::string::npos);
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Expression, ErrorUnknownFunction) {
  EXPECT_THROW(parse_expression("foo(2)", {"s"}), ParseError);
}

TEST(Expression, ErrorFunctionWithoutArguments) {
  try {
    parse_expression("sin + 1", {"s"});
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("argument list"), std::string::npos);
  }
}

TEST(Expression, ErrorTrailingGarbage) {
  try {
    parse_expression("1 2", {"s"});
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
}

TEST(Expression, ErrorEmptyAndUnclosed) {
  EXPECT_THROW(parse_expression("", {"s"}), ParseError);
  EXPECT_THROW(parse_expression("cos(t", {"t"}), ParseError);
  EXPECT_THROW(parse_expression("(1 + 2", {"s"}), ParseError);
}

TEST(Expression, PrintParseRoundTrip) {
  const std::vector<std::string> texts = {
      "1 + 0.5*cos(2*t)",
      "t^(-1) * exp(0) + sqrt(abs(t) + 1)",
      "-t^2 + 3*t/(1 + t^2) - log(t + 2)",
      "2^t^2",
      "sin(pi*t) - cos(t)^3",
  };
  std::mt19937 gen(12345);
  for (const std::string& text : texts) {
    const ExpressionAst a = parse_expression(text, {"t"});
    const ExpressionAst b = parse_expression(a.print(), {"t"});
    for (int k = 0; k < 100; ++k) {
      const double x = 0.1 + 3.0 * (static_cast<double>(gen()) / 4294967296.0);
      const double va = a.eval1(x);
      const double vb = b.eval1(x);
      ASSERT_TRUE(std::isfinite(va));
      ASSERT_NEAR(va, vb, 1e-15 * std::max(1.0, std::abs(va)))
          << text << " at " << x;
    }
  }
}

TEST(Expression, DualEvaluationDifferentiates) {
  const ExpressionAst ast = parse_expression("t^3 + sin(t)", {"t"});
  const double x = 0.7;
  const Dual r = ast.eval(std::vector<Dual>{Dual(x, 1.0)});
  EXPECT_NEAR(r.v, x * x * x + std::sin(x), 1e-15);
  EXPECT_NEAR(r.d, 3.0 * x * x + std::cos(x), 1e-14);
}

TEST(Expression, DualPowerWithConstantExponentAllowsNegativeBase) {
  const ExpressionAst ast = parse_expression("t^2", {"t"});
  const Dual r = ast.eval(std::vector<Dual>{Dual(-0.3, 1.0)});
  EXPECT_DOUBLE_EQ(r.v, 0.09);
  EXPECT_DOUBLE_EQ(r.d, -0.6);
}

}  // namespace
