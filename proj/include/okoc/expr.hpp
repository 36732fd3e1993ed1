#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace okoc {

/**
 * @brief Parsed expression over t, x1..xn, u1..um.
 *
 * Grammar (whitespace insignificant):
 *
 *   expr    = term { ("+" | "-") term } ;
 *   term    = unary { ("*" | "/") unary } ;
 *   unary   = "-" unary | power ;
 *   power   = primary [ "^" unary ] ;              (* right associative *)
 *   primary = number | variable | func "(" expr ")" | "(" expr ")" ;
 *   func    = "sin" | "cos" | "exp" | "tanh" | "sqrt" | "abs" ;
 *   variable = "t" | "x" index | "u" index ;       (* 1-based *)
 *
 * So "-x1^2" is -(x1^2) and "2^3^2" is 2^(3^2).
 */
class Expr {
 public:
  enum class Op {
    Const, Time, State, Control,
    Add, Sub, Mul, Div, Pow, Neg,
    Sin, Cos, Exp, Tanh, Sqrt, Abs,
  };

  struct Node {
    Op op;
    double value = 0.0;  // Const
    int index = 0;       // State / Control (0-based)
    int lhs = -1;
    int rhs = -1;
    bool operator==(const Node&) const = default;
  };

  /// Throws EvalError on division by zero, sqrt of a negative, or any non-finite intermediate.
  double eval(double t, std::span<const double> x, std::span<const double> u) const;

  /// Canonical fully parenthesized form; parse(to_string()) reproduces this tree.
  std::string to_string() const;

  int state_dim() const { return n_; }
  int control_dim() const { return m_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  bool operator==(const Expr& other) const = default;

 private:
  friend Expr parse(std::string_view source, int n, int m);
  double eval_node(int i, double t, std::span<const double> x,
                   std::span<const double> u) const;
  void print_node(int i, std::string& out) const;

  std::vector<Node> nodes_;  // root is the last node
  int n_ = 0;
  int m_ = 0;
};

/// Throws ParseError on malformed input, SemanticError on a variable outside (n, m).
Expr parse(std::string_view source, int n, int m);

inline double eval(const Expr& e, double t, std::span<const double> x,
                   std::span<const double> u) {
  return e.eval(t, x, u);
}

/// Evaluates each component of a vector field at one point.
void eval_all(std::span<const Expr> exprs, double t, std::span<const double> x,
              std::span<const double> u, std::span<double> out);

}  // namespace okoc
