#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "okoc/errors.hpp"
#include "okoc/expr.hpp"

using namespace okoc;

namespace {

double ev(const std::string& src, double t, std::vector<double> x, std::vector<double> u) {
  return parse(src, static_cast<int>(x.size()), static_cast<int>(u.size())).eval(t, x, u);
}

std::size_t parse_error_offset(const std::string& src, int n, int m) {
  try {
    parse(src, n, m);
  } catch (const ParseError& e) {
    return e.offset();
  }
  return std::string::npos;
}

}  // namespace

TEST_CASE("arithmetic over t, x and u") {
  CHECK(ev("t + x1*u1", 2.0, {3.0}, {4.0}) == 14.0);
}

TEST_CASE("dangling operator is a parse error at the end") {
  CHECK(parse_error_offset("x1 +", 1, 0) == 4);
  CHECK_THROWS_AS(parse("x1 +", 1, 0), ParseError);
}

TEST_CASE("unary minus binds looser than power") {
  CHECK(ev("-x1^2", 0.0, {3.0}, {}) == -9.0);
  CHECK(ev("(-x1)^2", 0.0, {3.0}, {}) == 9.0);
}

TEST_CASE("function values") {
  CHECK(ev("sin(t)", 0.0, {}, {}) == 0.0);
  CHECK(ev("exp(x1)", 0.0, {1.0}, {}) == doctest::Approx(2.7182818285).epsilon(1e-10));
  CHECK(ev("tanh(1)", 0.0, {}, {}) == doctest::Approx(0.7615941559557649).epsilon(1e-15));
  CHECK(ev("abs(-2.5) + sqrt(16) + cos(0)", 0.0, {}, {}) == 7.5);
}

TEST_CASE("evaluation errors are raised, never NaN") {
  CHECK_THROWS_AS(ev("1/x1", 0.0, {0.0}, {}), EvalError);
  CHECK_THROWS_AS(ev("sqrt(x1)", 0.0, {-1.0}, {}), EvalError);
  CHECK_THROWS_AS(ev("exp(x1)", 0.0, {1000.0}, {}), EvalError);
  CHECK_THROWS_AS(ev("x1^0.5", 0.0, {-4.0}, {}), EvalError);
}

TEST_CASE("signature violations are semantic errors") {
  CHECK_THROWS_AS(parse("x3 + x1", 2, 0), SemanticError);
  CHECK_THROWS_AS(parse("u1", 1, 0), SemanticError);
  CHECK_THROWS_AS(parse("x0", 1, 0), SemanticError);
  CHECK_THROWS_AS(parse("foo(x1)", 1, 0), SemanticError);
  CHECK_THROWS_AS(parse("y", 1, 0), SemanticError);
}

TEST_CASE("syntax errors carry offsets") {
  CHECK(parse_error_offset("", 1, 0) == 0);
  CHECK(parse_error_offset("(x1", 1, 0) == 3);
  CHECK(parse_error_offset("x1 x1", 1, 0) == 3);
  CHECK(parse_error_offset("sin x1", 1, 0) == 4);
  CHECK(parse_error_offset("2 * * 3", 0, 0) == 4);
  CHECK(parse_error_offset("1e", 0, 0) != std::string::npos);
}

TEST_CASE("evaluating with the wrong signature is rejected") {
  const Expr e = parse("x1 + u1", 1, 1);
  const std::vector<double> x{1.0, 2.0};
  const std::vector<double> u{1.0};
  CHECK_THROWS_AS(e.eval(0.0, x, u), ArgumentError);
}

TEST_CASE("precedence corpus with hand-computed values") {
  struct Row {
    const char* src;
    double value;
  };
  // x1 = 2, x2 = 3, u1 = -1, t = 0.5
  const std::vector<Row> corpus{
      {"1 + 2 * 3", 7.0},          {"(1 + 2) * 3", 9.0},       {"2 ^ 3 ^ 2", 512.0},
      {"(2 ^ 3) ^ 2", 64.0},       {"-2 ^ 2", -4.0},           {"--2", 2.0},
      {"- - x1", 2.0},             {"2 * -x1", -4.0},          {"x1 - x2 - 1", -2.0},
      {"x1 - (x2 - 1)", 0.0},      {"12 / x2 / x1", 2.0},      {"12 / (x2 / x1)", 8.0},
      {"x1 * x2 ^ 2", 18.0},       {"-x1 * x2", -6.0},         {"x1 ^ -1", 0.5},
      {"x2 ^ u1", 1.0 / 3.0},      {"t * 4 + 1", 3.0},         {"1 - t * 2", 0.0},
      {"x1^2 + u1^2", 5.0},        {"abs(u1) * x2", 3.0},      {"sqrt(x1 * 8)", 4.0},
      {"2.5e1 / 5", 5.0},          {"1.5E-1 * 20", 3.0},       {".5 + 0.5", 1.0},
      {"exp(0) + 1", 2.0},         {"sin(0) * 5 - 1", -1.0},   {"-(x1 + x2)", -5.0},
      {"x2 - -x1", 5.0},           {"(x1)", 2.0},              {" x1\t+\nx2 ", 5.0},
  };
  REQUIRE(corpus.size() == 30);
  const std::vector<double> x{2.0, 3.0};
  const std::vector<double> u{-1.0};
  for (const Row& row : corpus) {
    CAPTURE(row.src);
    CHECK(parse(row.src, 2, 1).eval(0.5, x, u) == doctest::Approx(row.value).epsilon(1e-14));
  }
}

TEST_CASE("printing then parsing reproduces the tree") {
  const std::vector<std::string> corpus{
      "t + x1*u1", "-x1^2", "2^3^2", "(2^3)^2", "sin(t) * exp(-x2) / (1 + x1^2)",
      "--x1", "x1 - (x2 - u1)", "abs(u1) + sqrt(x2) - tanh(t)", "0.1 + 1e-300 * 3",
      "1/3", "-(x1 + x2) * cos(t)", "x2 ^ -u1", "123456789.125"};
  for (const std::string& src : corpus) {
    CAPTURE(src);
    const Expr e = parse(src, 2, 1);
    const Expr again = parse(e.to_string(), 2, 1);
    CHECK(again == e);
    CHECK(again.to_string() == e.to_string());
  }
  CHECK(parse("-x1^2", 1, 0).to_string() == "(-(x1 ^ 2))");
}

TEST_CASE("evaluation is deterministic") {
  const Expr e = parse("sin(t) * exp(x1) / (1 + u1^2) - tanh(x1 * t)", 1, 1);
  const std::vector<double> x{0.37};
  const std::vector<double> u{-1.3};
  const double a = e.eval(0.91, x, u);
  for (int i = 0; i < 10; ++i) CHECK(e.eval(0.91, x, u) == a);
}

TEST_CASE("vector field evaluation") {
  const std::vector<Expr> f{parse("x2", 2, 1), parse("-x1 + u1", 2, 1)};
  const std::vector<double> x{1.0, 2.0};
  const std::vector<double> u{0.5};
  std::vector<double> out(2);
  eval_all(f, 0.0, x, u, out);
  CHECK(out[0] == 2.0);
  CHECK(out[1] == -0.5);
  std::vector<double> bad(1);
  CHECK_THROWS_AS(eval_all(f, 0.0, x, u, bad), ArgumentError);
}
