#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "strathom/dsl.hpp"
#include "strathom/random.hpp"

using namespace strathom;
using namespace strathom::dsl;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(Parse, SumOfCoordinates) {
  auto f = parse_map("y + z", 3);
  EXPECT_EQ(f.input_dim(), 3u);
  EXPECT_EQ(f.output_dim(), 1u);
  EXPECT_DOUBLE_EQ(f.eval(vec({0, 1, 2}))(0), 3.0);
}

TEST(Parse, IdentityOnLine) {
  auto f = parse_map("x1", 1);
  EXPECT_DOUBLE_EQ(f.eval(vec({-2.5}))(0), -2.5);
}

TEST(Parse, ProductMinusSine) {
  auto f = parse_map("x1*x2 - sin(x3)", 3);
  EXPECT_DOUBLE_EQ(f.eval(vec({2, 3, 0}))(0), 6.0);
}

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(parse_map("2 + 3*4", 1).eval(vec({0}))(0), 14.0);
  EXPECT_DOUBLE_EQ(parse_map("2^3^2", 1).eval(vec({0}))(0), 512.0);
  EXPECT_DOUBLE_EQ(parse_map("-2^2", 1).eval(vec({0}))(0), -4.0);
  EXPECT_DOUBLE_EQ(parse_map("8 - 3 - 2", 1).eval(vec({0}))(0), 3.0);
  EXPECT_DOUBLE_EQ(parse_map("8 / 4 / 2", 1).eval(vec({0}))(0), 1.0);
}

TEST(Parse, SyntaxErrorCarriesPosition) {
  try {
    parse_map("x1 +\n  * x2", 2);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::syntax);
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 3);
  }
}

TEST(Parse, UnknownIdentifier) {
  try {
    parse_map("foo(x1)", 1);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::unknown_identifier);
  }
  EXPECT_THROW(parse_map("q", 2), ParseError);
}

TEST(Parse, ArityMismatch) {
  try {
    parse_map("x4", 3);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::arity);
  }
  try {
    parse_map("sin(x1, x2)", 2);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::arity);
  }
}

TEST(Parse, AliasesOnlyInLowDimension) {
  EXPECT_NO_THROW(parse_map("w", 4));
  EXPECT_THROW(parse_map("x", 5), ParseError);
  EXPECT_THROW(parse_map("z", 2), ParseError);
}

TEST(Parse, JuxtapositionRejected) {
  EXPECT_THROW(parse_map("2 x", 1), ParseError);
}

TEST(Parse, RoundTrip) {
  const char* sources[] = {"y + z",
                           "x1*x2 - sin(x3)",
                           "-x^2 + exp(-1/(1+y^2))",
                           "sqrt(x^2+y^2) - 2, z",
                           "(2+y*cos(x))*cos(2*x), (2+y*cos(x))*sin(2*x), y*sin(x)",
                           "abs(x) + min(y, z) - max(x, 1e-3)",
                           "x^0.5 + bump(x) + log(2.5) + pi"};
  for (const char* src : sources) {
    const auto first = parse_list(src, 3);
    std::string printed;
    for (std::size_t i = 0; i < first.size(); ++i) printed += (i ? ", " : "") + print(first[i]);
    const auto second = parse_list(printed, 3);
    ASSERT_EQ(first.size(), second.size()) << src;
    for (std::size_t i = 0; i < first.size(); ++i) EXPECT_TRUE(equal(first[i], second[i])) << src;
  }
}

TEST(Eval, Examples) {
  EXPECT_DOUBLE_EQ(parse_map("y", 3).eval(vec({5, 0, -1}))(0), 0.0);
  EXPECT_DOUBLE_EQ(parse_map("exp(x1)", 1).eval(vec({0}))(0), 1.0);
}

TEST(Eval, DomainIsEnforced) {
  auto f = parse_map("x, y, 0", 2, {"y"});
  EXPECT_NO_THROW(f.eval(vec({0, 1})));
  EXPECT_THROW(f.eval(vec({0, -1})), DomainError);
  EXPECT_NO_THROW(f.eval_unchecked(vec({0, -1})));
  EXPECT_THROW(f.jacobian(vec({0, 0})), DomainError);
}

TEST(Eval, NonFiniteIntermediates) {
  EXPECT_THROW(parse_map("log(x1)", 1).eval(vec({-1})), EvaluationError);
  EXPECT_THROW(parse_map("1/x1", 1).eval(vec({0})), EvaluationError);
  EXPECT_THROW(parse_map("sqrt(x1)", 1).eval(vec({-1})), EvaluationError);
}

TEST(Eval, Deterministic) {
  auto f = parse_map("sin(x)*exp(y) - x^3/(1+z^2)", 3);
  const auto x = vec({0.3, -0.7, 1.9});
  const auto a = f.jacobian(x);
  const auto b = f.jacobian(x);
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * a.size()));
}

TEST(Jacobian, LinearMaps) {
  auto j = parse_map("y + z", 3).jacobian(vec({4, -1, 2}));
  EXPECT_EQ(j.rows(), 1);
  EXPECT_DOUBLE_EQ(j(0, 0), 0);
  EXPECT_DOUBLE_EQ(j(0, 1), 1);
  EXPECT_DOUBLE_EQ(j(0, 2), 1);
}

TEST(Jacobian, QuadraticExample) {
  auto j = parse_map("x1^2, x1*x2", 2).jacobian(vec({1, 2}));
  EXPECT_DOUBLE_EQ(j(0, 0), 2);
  EXPECT_DOUBLE_EQ(j(0, 1), 0);
  EXPECT_DOUBLE_EQ(j(1, 0), 2);
  EXPECT_DOUBLE_EQ(j(1, 1), 1);
}

TEST(Jacobian, KinksAreReported) {
  EXPECT_THROW(parse_map("abs(x1)", 1).jacobian(vec({0})), NonDifferentiableError);
  EXPECT_THROW(parse_map("max(x1, x2)", 2).jacobian(vec({1, 1})), NonDifferentiableError);
  EXPECT_THROW(parse_map("sqrt(x1)", 1).jacobian(vec({0})), NonDifferentiableError);
  EXPECT_NO_THROW(parse_map("abs(x1)", 1).jacobian(vec({0.5})));
  EXPECT_FALSE(parse_map("abs(x1)", 1).is_smooth());
  EXPECT_TRUE(parse_map("bump(x1)", 1).is_smooth());
}

TEST(Jacobian, MatchesFiniteDifferences) {
  auto f = parse_map("sin(x)*exp(y) - x^3/(1+z^2), sqrt(1 + x^2 + y^2)*cos(z), bump(x + 0.5) * y^2.5 ",
                     3, {"y"});
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd x(3);
    x << uniform(rng, -1, 1), uniform(rng, 0.1, 2), uniform(rng, -1, 1);
    const auto ad = f.jacobian(x);
    const auto fd = finite_difference_jacobian(f, x);
    const double scale = std::max(1.0, ad.cwiseAbs().maxCoeff());
    EXPECT_LT((ad - fd).cwiseAbs().maxCoeff() / scale, 1e-6);
  }
}

TEST(Jacobian, SmoothStepDerivative) {
  auto f = parse_map("bump(x1)", 1);
  EXPECT_DOUBLE_EQ(f.eval(vec({0.5}))(0), 0.5);
  EXPECT_GT(f.jacobian(vec({0.5}))(0, 0), 0.0);
  EXPECT_EQ(f.eval(vec({-1}))(0), 0.0);
  EXPECT_EQ(f.eval(vec({2}))(0), 1.0);
}

TEST(SmoothMap, TooManyInputs) {
  EXPECT_THROW(SmoothMap(kMaxVars + 1, {make_const(1.0)}), DimensionError);
}
