#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "okoc/expr.hpp"
#include "okoc/occupation.hpp"
#include "okoc/problem.hpp"

namespace okoc {

/**
 * @brief Control signal on [0, T]: either piecewise constant, or one expression per control
 * coordinate in (t, x) (signature (n, 0)), which also covers open-loop u(t).
 */
class PiecewiseControl {
 public:
  /// breakpoints = {0, t_1, ..., T}, one m-vector per segment.
  PiecewiseControl(std::vector<double> breakpoints, std::vector<Eigen::VectorXd> values);
  explicit PiecewiseControl(std::vector<Expr> law);

  /// `segments` equal-length segments on [0, T].
  static PiecewiseControl uniform(double horizon, std::vector<Eigen::VectorXd> values);

  bool is_law() const { return law_.has_value(); }
  int control_dim() const;
  int segments() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<Eigen::VectorXd>& values() const { return values_; }

  /// Index of the segment containing t (right-continuous; T belongs to the last segment).
  int segment_at(double t) const;
  /// Segment value, or the law evaluated at (t, x).
  Eigen::VectorXd value(double t, const Eigen::VectorXd& x) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<Eigen::VectorXd> values_;
  std::optional<std::vector<Expr>> law_;
};

/**
 * Classical RK4 with N fixed steps. A piecewise-constant control uses the segment containing
 * each step's midpoint for all stages; nodes record the right value and, at jumps, the left
 * limit. Throws SimulationError at the first non-finite node.
 */
Trajectory simulate(std::span<const Expr> f, const Eigen::VectorXd& x0, const PiecewiseControl& u,
                    double horizon, int steps);

/// int_0^T h dt + F(x(T)). F takes signature (n, 0) and is evaluated at t = T.
double trajectory_cost(const Trajectory& traj, const Expr& h, const Expr& F);

/**
 * Optimal cost p(0) x0^2 of x' = a x + bb u, cost int q x^2 + r u^2, obtained by RK4 (2000
 * steps) on -p' = q + 2 a p - p^2 bb^2 / r backward from p(T) = 0.
 */
double riccati_lq_cost(double a, double bb, double q, double r, double horizon, double x0);

struct BruteForceResult {
  double best_cost;
  PiecewiseControl best_control;
  long long candidates;
};

/**
 * Enumerates every piecewise-constant control with `segments` equal segments and values from
 * `levels` in each coordinate, simulating each with segments * steps_per_segment RK4 steps.
 * Ties go to the lexicographically smallest control (levels sorted ascending).
 * Throws ArgumentError when levels^(segments m) exceeds 1e6.
 */
BruteForceResult brute_force_cost(const ProblemSpec& spec, std::vector<double> levels,
                                  int segments, int steps_per_segment);

}  // namespace okoc
