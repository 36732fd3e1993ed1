#pragma once

#include <vector>

#include <Eigen/Core>

#include "okoc/expr.hpp"
#include "okoc/kernels.hpp"

namespace okoc {

/// Axis-aligned box [lower, upper]. A zero-dimensional box is allowed (m = 0).
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Box() = default;
  Box(Eigen::VectorXd lo, Eigen::VectorXd hi);

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(Eigen::Ref<const Eigen::VectorXd> p, double tol = 0.0) const;
  Eigen::VectorXd width() const { return upper - lower; }
};

/// Cartesian product of boxes, in order.
Box product(const std::vector<Box>& parts);

/// A fixed-horizon optimal control problem with its three kernel spaces.
/// The terminal cost depends on x only: it is parsed with signature (n, 0) and t = T.
///   S = [0,T] x X x U (running cost), Sigma = [0,T] x X (test functions), D (terminal states).
struct ProblemSpec {
  int n = 0;
  int m = 0;
  double horizon = 1.0;
  Eigen::VectorXd x0;
  Box X;
  Box U;
  Box D;
  std::vector<Expr> dynamics;
  Expr running_cost;
  Expr terminal_cost;
  KernelConfig kernel_S = KernelConfig::gaussian(1, 1.0);
  KernelConfig kernel_Sigma = KernelConfig::gaussian(1, 1.0);
  KernelConfig kernel_D = KernelConfig::gaussian(1, 1.0);

  Box time_box() const;
  Box s_box() const;
  Box sigma_box() const;

  /// Throws ArgumentError when dimensions, boxes, x0 or kernel dims are inconsistent.
  void validate() const;
};

}  // namespace okoc
